"""
Log-log slope regression for scaling exponents.
"""
import numpy as np
from sklearn.linear_model import LinearRegression


def fit_log_slope(x, y):
    """Least-squares slope of log|y| against log x.

    Args:
        x: Positive abscissae (scales).
        y: Values with |y| > 0.

    Returns:
        Tuple (slope, intercept) of the fitted line.
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y))
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("Log-log regression needs positive abscissae and nonzero values")
    model = LinearRegression().fit(np.log(x)[:, None], np.log(y))
    return float(model.coef_[0]), float(model.intercept_)
