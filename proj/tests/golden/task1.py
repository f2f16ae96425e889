# Instantiate chateda
eda = chateda()
# Setup EDA environment
eda.setup(design_name="leo", platform="sky130")
# Run synthesis
eda.run_synthesis()
# Perform floorplanning with core utilization of 60%
eda.floorplan(core_utilization=60)
eda.placement()
eda.cts()
eda.global_route()
eda.detail_route()
# Generate the final report
eda.final_report()
# Evaluation
final_performance = eda.get_metric("final", ["area", "power"])
print(final_performance)
