from prometheus_client import Counter

integration_sweeps = Counter("slgreen_integration_sweeps", "Number of RK4 sweeps", ["side"])
omega_evaluations = Counter("slgreen_omega_evaluations", "Number of characteristic function evaluations")
refined_roots = Counter("slgreen_refined_roots", "Number of roots refined by Brent's method")
skipped_cells = Counter("slgreen_skipped_cells", "Number of scan cells skipped after divergence")
resolution_retries = Counter("slgreen_resolution_retries", "Number of retries at doubled resolution")
errors = Counter("slgreen_numerical_errors", "Number of numerical errors", ["stage"])
