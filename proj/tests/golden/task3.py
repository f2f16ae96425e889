def tuning_func(core_utilization, density, tns_end_percent):
    eda = chateda()
    eda.setup(design_name="aes", platform="nangate45")
    eda.run_synthesis(clock_period=5)
    eda.floorplan(core_utilization=core_utilization)
    eda.placement(density=density)
    eda.cts(tns_end_percent=tns_end_percent)
    eda.global_route()
    eda.detail_route()
    eda.final_report()
    metrics = eda.get_metric("final", ["area", "power"])
    return metrics[0] * metrics[1]
param_space = {
    "core_utilization": {"minmax": [60, 90], "step": 5},
    "density": {"minmax": [0.6, 0.9], "step": 0.05},
    "tns_end_percent": {"minmax": [30, 50], "step": 5}
}
# Execute tuning
best = tune(tuning_func, param_space)
print(best["objective"])
