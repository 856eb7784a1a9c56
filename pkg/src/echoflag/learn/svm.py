"""Linear SVM trained with SGD on hinge loss, plus logistic calibration."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, SingleClassDataset
from .nets import sigmoid
from .specs import SVMSpec


class LinearSVM:
    """Hinge loss + L2(alpha), SGD with inverse-scaling step size.

    After fitting, margins are pushed through a logistic link fitted on the
    training data so the SVM exposes the same probability interface as the
    other models.
    """

    def __init__(self, spec: SVMSpec, seed: int = 0, epochs: int = 100):
        spec.validate()
        self.spec = spec
        self.seed = seed
        self.epochs = epochs
        self.w = None
        self.b = 0.0
        self.cal_a = 1.0
        self.cal_b = 0.0

    def margin(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1] != self.w.shape[0]:
            raise DimensionMismatch(f"expected {self.w.shape[0]} features")
        return x @ self.w + self.b

    def fit(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if len(np.unique(y)) < 2:
            raise SingleClassDataset("SVM needs both classes")
        ypm = 2.0 * y - 1.0
        rng = np.random.Generator(np.random.PCG64(self.seed))
        n, d = x.shape
        alpha = self.spec.alpha
        self.w = np.zeros(d)
        self.b = 0.0
        t = 0
        eta0 = 1.0 / np.sqrt(alpha)
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                t += 1
                eta = eta0 / (1.0 + alpha * eta0 * t)  # inverse scaling
                m = ypm[i] * (x[i] @ self.w + self.b)
                self.w *= 1.0 - eta * alpha
                if m < 1.0:
                    self.w += eta * ypm[i] * x[i]
                    self.b += eta * ypm[i]
        self._calibrate(x, y, rng)
        return self

    def _calibrate(self, x, y, rng):
        # 1-D logistic regression on the margin, by Newton iterations
        m = self.margin(x)
        a, b = 1.0, 0.0
        for _ in range(50):
            p = sigmoid(a * m + b)
            g = np.array([np.sum((p - y) * m), np.sum(p - y)])
            w = p * (1 - p) + 1e-12
            h = np.array([
                [np.sum(w * m * m) + 1e-9, np.sum(w * m)],
                [np.sum(w * m), np.sum(w) + 1e-9],
            ])
            step = np.linalg.solve(h, g)
            a, b = a - step[0], b - step[1]
            if np.abs(step).max() < 1e-10:
                break
        self.cal_a, self.cal_b = float(a), float(b)

    def predict_proba(self, x) -> np.ndarray:
        return sigmoid(self.cal_a * self.margin(x) + self.cal_b)
