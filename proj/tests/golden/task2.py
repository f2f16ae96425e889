# Define grid search parameters
core_utils = [60, 70, 80]  # %
clk_periods = [2, 3, 4]  # ns
densities = [0.6, 0.7, 0.8]
results = []
for core_util in core_utils:
    for clk_period in clk_periods:
        for density in densities:
            eda = chateda()
            # Setup
            eda.setup("how", "gf180", verilog="how.v")
            eda.run_synthesis(clock_period=clk_period)
            eda.floorplan(core_utilization=core_util)
            eda.placement(density=density)
            eda.cts()
            eda.global_route()
            eda.detail_route()
            # Finishing
            eda.final_report()
            tns = eda.get_metric(stage="final", metrics=["tns"])
            results.append({
                "core_utilization": core_util,
                "clock_period": clk_period,
                "placement_density": density,
                "tns": tns,
            })
print(len(results))
