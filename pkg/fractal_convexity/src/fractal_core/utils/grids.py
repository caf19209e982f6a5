import numpy as np

LOG_FLOOR = 1e-6


def search_axis(n: int, u_max: float) -> np.ndarray:
    """{0} followed by n log-spaced points in [1e-6, u_max]"""
    return np.concatenate(([0.0], np.logspace(np.log10(LOG_FLOOR), np.log10(u_max), n)))


def positive_axis(n: int, u_max: float) -> np.ndarray:
    return np.logspace(np.log10(LOG_FLOOR), np.log10(u_max), n)


def t_axis(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


def probe_points(n: int, low: float, high: float, breakpoints=()) -> np.ndarray:
    """Uniform interior points of [low, high], merged with any breakpoints inside it"""
    points = np.linspace(low, high, n + 2)[1:-1]
    extra = [b for b in breakpoints if low < b < high]
    return np.unique(np.concatenate((points, extra)))
