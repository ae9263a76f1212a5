"""Shapiro-Wilk normality test.

Implements the Royston (1995) approximation: Blom-score weights with
polynomial corrections for the two largest order statistics, then a
normalizing transform of W whose parameters depend on the sample size.
Valid for 3 <= n <= 5000.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

_A_N = (0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_A_N1 = (0.042981, -0.293762, -1.752461, 5.682633, -3.582633)


@dataclass(frozen=True)
class NormalityResult:
    statistic: float  # the W statistic
    p_value: float
    n: int


def _poly(coeffs, u: float) -> float:
    acc = 0.0
    for k, c in enumerate(coeffs, start=1):
        acc += c * u**k
    return acc


def shapiro_wilk(xs) -> NormalityResult:
    x = np.sort(np.asarray(xs, dtype=np.float64))
    n = x.size
    if n < 3:
        raise ValueError("shapiro_wilk requires n >= 3")
    if n > 5000:
        raise ValueError("shapiro_wilk supports n <= 5000")
    if x[0] == x[-1]:
        raise ValueError("shapiro_wilk is undefined for constant data")

    m = ndtri((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    ssumm2 = float((m * m).sum())
    c = m / math.sqrt(ssumm2)
    u = 1.0 / math.sqrt(n)

    a = np.empty(n, dtype=np.float64)
    if n == 3:
        a[0] = -math.sqrt(0.5)
        a[1] = 0.0
        a[2] = math.sqrt(0.5)
    else:
        a_n = c[-1] + _poly(_A_N, u)
        if n > 5:
            a_n1 = c[-2] + _poly(_A_N1, u)
            phi = (ssumm2 - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2) / (
                1.0 - 2.0 * a_n**2 - 2.0 * a_n1**2
            )
            a[2:-2] = m[2:-2] / math.sqrt(phi)
            a[-1] = a_n
            a[-2] = a_n1
            a[0] = -a_n
            a[1] = -a_n1
        else:
            phi = (ssumm2 - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * a_n**2)
            a[1:-1] = m[1:-1] / math.sqrt(phi)
            a[-1] = a_n
            a[0] = -a_n

    xbar = x.mean()
    sse = float(((x - xbar) ** 2).sum())
    b = float((a * x).sum())
    w = min(b * b / sse, 1.0)

    if n == 3:
        p = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.asin(math.sqrt(0.75)))
        p = min(max(p, 0.0), 1.0)
        return NormalityResult(statistic=w, p_value=p, n=n)

    if n <= 11:
        g = -2.273 + 0.459 * n
        mu = 0.5440 - 0.39978 * n + 0.025054 * n**2 - 0.0006714 * n**3
        sigma = math.exp(1.3822 - 0.77857 * n + 0.062767 * n**2 - 0.0020322 * n**3)
        arg = g - math.log1p(-w)
        if arg <= 0:  # w indistinguishable from 1; no evidence against normality
            return NormalityResult(statistic=w, p_value=1.0, n=n)
        z = (-math.log(arg) - mu) / sigma
    else:
        ln_n = math.log(n)
        mu = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n**2 + 0.0038915 * ln_n**3
        sigma = math.exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n**2)
        if w >= 1.0:
            return NormalityResult(statistic=w, p_value=1.0, n=n)
        z = (math.log1p(-w) - mu) / sigma

    p = 0.5 * math.erfc(z / math.sqrt(2.0))  # upper normal tail
    return NormalityResult(statistic=w, p_value=min(max(p, 0.0), 1.0), n=n)
