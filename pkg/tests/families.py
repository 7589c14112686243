import numpy as np

from grushin_lab import potential as pot


def tabulated_two_power():
    """Samples of x^2 + x^4 on a log grid, both sides."""
    s = np.logspace(-3, 3, 61)
    v = s ** 2 + s ** 4
    return pot.tabulated(np.r_[-s[::-1], s], np.r_[v[::-1], v])


BUILTIN = {
    "pow0.5": pot.power(0.5),
    "pow1": pot.power(1),
    "pow1.5": pot.power(1.5),
    "pow2": pot.power(2),
    "pow3": pot.power(3),
    "pow4": pot.power(4),
    "asym2_4": pot.power_asym(2, 4),
    "logpert2": pot.power_logperturbed(2, 0.1),
    "two_power1_3": pot.two_power(1, 3),
    "tabulated": tabulated_two_power(),
}
