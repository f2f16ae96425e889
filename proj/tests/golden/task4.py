def tuning_func(core_utilization, density, tns_end_percent):
    eda = chateda()
    # Set up
    eda.setup("high_end_gpu", "nangate45")
    eda.run_synthesis(clock_period=5)
    eda.floorplan(core_utilization=core_utilization)
    eda.placement(density=density)
    eda.cts(tns_end_percent=tns_end_percent)
    # Perform routing
    eda.global_route()
    eda.detail_route()
    # Get metrics
    metrics = eda.get_metric("route", ["area", "power"])
    return metrics[0] * metrics[1]
# Define parameter space
params = {
    "core_utilization": {"minmax": [60, 85], "step": 5},
    "density": {"minmax": [0.55, 1], "step": 0.05},
    "tns_end_percent": {"minmax": [30, 60], "step": 5},
}
# Execute tuning
tune(tuning_func, params)
