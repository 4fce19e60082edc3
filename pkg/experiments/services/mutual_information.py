"""
Взаимная информация LLR и вспомогательные статистики.

J(σ) - взаимная информация между битом и LLR из согласованной гауссовой модели
L = σ²/2 · x + σ·n, где x = ±1 кодирует бит (x = +1 для бита 0).
"""
import logging
import math

import numpy as np
from django.conf import settings
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.stats import norm

from coding.exceptions import ConvergenceError

logger = logging.getLogger(__name__)

# При σ выше этой границы 1 - J(σ) меньше 1e-12
SIGMA_UPPER = 200.0


def j_function(sigma: float) -> float:
    """
    J(σ) = 1 - E[log2(1 + exp(-L))] для L ~ N(σ²/2, σ²), считается численным интегрированием.

    :param sigma: Стандартное отклонение LLR, σ >= 0.
    :return: Взаимная информация в [0, 1].
    """
    if sigma <= 0.0:
        return 0.0
    mean = sigma ** 2 / 2.0

    def integrand(value: float) -> float:
        return norm.pdf(value, loc=mean, scale=sigma) * np.logaddexp(0.0, -value) / math.log(2.0)

    lower, upper = mean - 12.0 * sigma, mean + 12.0 * sigma
    points = [0.0] if lower < 0.0 < upper else None
    loss, _ = quad(integrand, lower, upper, limit=200, points=points)
    return float(min(1.0, max(0.0, 1.0 - loss)))


def j_inverse(value: float, tolerance: float | None = None) -> float:
    """
    Численно обращает J: находит σ, при котором J(σ) = value.

    :param value: Взаимная информация в [0, 1).
    :param tolerance: Допуск |J(σ) - value|, по умолчанию ``settings.J_FUNCTION_TOLERANCE``.
    :raises ConvergenceError: Если value вне [0, 1) или решение не попало в допуск.
    """
    tolerance = settings.J_FUNCTION_TOLERANCE if tolerance is None else tolerance
    if not 0.0 <= value < 1.0:
        raise ConvergenceError(f"Взаимная информация {value} вне диапазона [0, 1).")
    if value == 0.0:
        return 0.0

    upper = 1.0
    while j_function(upper) < value:
        upper *= 2.0
        if upper > SIGMA_UPPER:
            raise ConvergenceError(f"J⁻¹({value}): σ вне диапазона [0, {SIGMA_UPPER}].")

    sigma = brentq(lambda s: j_function(s) - value, 0.0, upper, xtol=1e-12, rtol=1e-12, maxiter=200)
    residual = abs(j_function(sigma) - value)
    if residual > tolerance:
        logger.error(f"J inversion did not converge: value={value}, sigma={sigma}, residual={residual}")
        raise ConvergenceError(f"J⁻¹({value}) не сошлось: невязка {residual:.2e} > {tolerance:.0e}.")
    return float(sigma)


def consistent_gaussian_llr(bits: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Априорные LLR согласованной гауссовой модели: σ²/2 · x + σ·n."""
    signs = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
    return sigma ** 2 / 2.0 * signs + sigma * rng.standard_normal(signs.shape)


def estimate_mutual_information(llr: np.ndarray, bits: np.ndarray) -> float:
    """
    Выборочная оценка взаимной информации: 1 - mean(log2(1 + exp(-L·x))), ограниченная [0, 1].

    :param llr: LLR.
    :param bits: Истинные биты той же формы.
    """
    signs = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
    loss = np.mean(np.logaddexp(0.0, -np.asarray(llr) * signs)) / math.log(2.0)
    return float(min(1.0, max(0.0, 1.0 - loss)))


def snr_of(values: np.ndarray) -> float:
    """Квадрат среднего к дисперсии, не больше ``settings.SNR_EVOLUTION_CAP``."""
    values = np.asarray(values, dtype=np.float64)
    variance = float(np.var(values))
    cap = settings.SNR_EVOLUTION_CAP
    if variance == 0.0:
        return cap
    return float(min(cap, np.mean(values) ** 2 / variance))


def pearson(first: np.ndarray, second: np.ndarray) -> float:
    """Коэффициент корреляции Пирсона; если одна из выборок постоянна, результат равен 0."""
    first = np.asarray(first, dtype=np.float64).ravel()
    second = np.asarray(second, dtype=np.float64).ravel()
    if first.size < 2 or np.ptp(first) == 0.0 or np.ptp(second) == 0.0:
        return 0.0
    return float(np.clip(np.corrcoef(first, second)[0, 1], -1.0, 1.0))
