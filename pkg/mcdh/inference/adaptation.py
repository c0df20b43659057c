from __future__ import annotations

import logging
import math

import numpy as np

logger = logging.getLogger(__name__)


class DualAveraging:
    """Nesterov dual averaging of log step size towards a target mean acceptance statistic."""

    class Settings:
        gamma = 0.05
        t0 = 10.0
        kappa = 0.75

    def __init__(self, target_accept: float, step_size: float) -> None:
        self.settings = self.Settings()
        self.target_accept = target_accept
        self.restart(step_size)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(target_accept={self.target_accept}, step_size={self.step_size:g}, iterations={self.counter})"

    def restart(self, step_size: float) -> None:
        self.mu = math.log(10 * step_size)
        self.step_size = step_size
        self.counter = 0
        self.s_bar = self.x_bar = 0.0

    def learn(self, accept_stat: float) -> float:
        """Update with one iteration's acceptance statistic and return the step size to use next."""
        settings = self.settings
        self.counter += 1
        accept_stat = min(1.0, accept_stat)

        eta = 1.0 / (self.counter + settings.t0)
        self.s_bar = (1.0 - eta) * self.s_bar + eta * (self.target_accept - accept_stat)

        x = self.mu - self.s_bar * math.sqrt(self.counter) / settings.gamma
        x_eta = self.counter ** -settings.kappa
        self.x_bar = (1.0 - x_eta) * self.x_bar + x_eta * x

        self.step_size = math.exp(x)
        return self.step_size

    @property
    def final_step_size(self) -> float:
        return math.exp(self.x_bar) if self.counter else self.step_size


class WelfordVariance:
    """Streaming per-coordinate sample variance."""

    def __init__(self, dimension: int) -> None:
        self.dimension = dimension
        self.restart()

    def restart(self) -> None:
        self.count = 0
        self.mean = np.zeros(self.dimension)
        self.m2 = np.zeros(self.dimension)

    def add(self, value: np.ndarray) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)

    def variance(self) -> np.ndarray:
        return self.m2 / (self.count - 1) if self.count > 1 else np.ones(self.dimension)

    def regularized_variance(self) -> np.ndarray:
        """Sample variance shrunk towards 1e-3, weighting the sample by n / (n + 5)."""
        count = self.count
        return (count / (count + 5.0)) * self.variance() + 1e-3 * (5.0 / (count + 5.0))


class WindowedAdaptation:
    """
    Warmup schedule for a diagonal inverse mass matrix: an initial fast buffer, a sequence of doubling slow windows
    that each end with a variance estimate, and a terminal fast buffer. Warmups too short for the default
    75 / 25 / 50 buffers use 15% / 75% / 10% of the warmup instead.
    """

    class Settings:
        init_buffer = 75
        base_window = 25
        term_buffer = 50
        minimum_warmup = 20

    def __init__(self, warmup: int, dimension: int) -> None:
        settings = self.Settings()
        self.warmup = warmup
        self.estimator = WelfordVariance(dimension)
        self.counter = 0
        self.enabled = warmup >= settings.minimum_warmup

        self.init_buffer, self.base_window, self.term_buffer = settings.init_buffer, settings.base_window, settings.term_buffer
        if self.enabled and self.init_buffer + self.base_window + self.term_buffer > warmup:
            self.init_buffer = int(0.15 * warmup)
            self.term_buffer = int(0.1 * warmup)
            self.base_window = warmup - (self.init_buffer + self.term_buffer)
            logger.info(f"Warmup of {warmup} is too short for the default adaptation windows; using buffers {self.init_buffer}/{self.base_window}/{self.term_buffer}.")

        self.window_size = self.base_window
        self.next_window = self.init_buffer + self.window_size - 1

    def __repr__(self) -> str:
        return f"{type(self).__name__}(warmup={self.warmup}, buffers=({self.init_buffer}, {self.base_window}, {self.term_buffer}), iteration={self.counter})"

    def in_window(self) -> bool:
        return self.enabled and self.init_buffer <= self.counter < self.warmup - self.term_buffer and self.counter != self.warmup

    def window_ends(self) -> bool:
        return self.enabled and self.counter == self.next_window and self.counter != self.warmup

    def learn(self, position: np.ndarray) -> tuple[bool, np.ndarray]:
        """Record one warmup position. Returns (window ended, new inverse mass) where the mass is only meaningful when a window ended."""
        if self.in_window():
            self.estimator.add(position)

        if self.window_ends():
            self._advance_window()
            inverse_mass = self.estimator.regularized_variance()
            logger.debug(f"Adaptation window closed at iteration {self.counter} with {self.estimator.count} samples.")
            self.estimator.restart()
            self.counter += 1
            return True, inverse_mass

        self.counter += 1
        return False, np.ones(self.estimator.dimension)

    def _advance_window(self) -> None:
        last = self.warmup - self.term_buffer - 1
        if self.next_window == last:
            return

        self.window_size *= 2
        self.next_window = self.counter + self.window_size
        if self.next_window != last and self.next_window + 2 * self.window_size >= self.warmup - self.term_buffer:
            self.next_window = last
