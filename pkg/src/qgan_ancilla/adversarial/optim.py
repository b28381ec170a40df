from __future__ import annotations

import numpy as np


class TrainingAborted(RuntimeError):
    """A run hit a non-finite value; carries the partial record when available."""

    def __init__(self, message: str, record=None):
        super().__init__(message)
        self.record = record


class Adam:
    """Adam with bias correction; ``ascend=True`` flips the update direction."""

    def __init__(self, size: int, lr: float = 0.01, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray, ascend: bool = False) -> np.ndarray:
        grad = np.asarray(grad, dtype=float)
        if grad.shape != self.m.shape:
            raise ValueError(f"gradient shape {grad.shape} does not match moments {self.m.shape}")
        if not np.all(np.isfinite(grad)):
            raise TrainingAborted(f"non-finite gradient at optimizer step {self.t + 1}")
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        update = self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
        return params + update if ascend else params - update

    def remap(self, size: int, old_to_new: np.ndarray) -> None:
        """Resize moments; entry ``i`` moves to ``old_to_new[i]``, new slots start at zero."""
        m, v = np.zeros(size), np.zeros(size)
        m[old_to_new] = self.m
        v[old_to_new] = self.v
        self.m, self.v = m, v


class SGD:
    """Plain gradient step; stateless, so ``remap`` has nothing to move."""

    def __init__(self, lr: float = 0.1):
        self.lr = lr
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray, ascend: bool = False) -> np.ndarray:
        if not np.all(np.isfinite(grad)):
            raise TrainingAborted(f"non-finite gradient at optimizer step {self.t + 1}")
        self.t += 1
        return params + self.lr * grad if ascend else params - self.lr * grad

    def remap(self, size: int, old_to_new: np.ndarray) -> None:
        pass


def project_weights(phi: np.ndarray, bound: float, mode: str = "l2") -> np.ndarray:
    """Clip onto the box ``|phi_k| <= bound`` or the ball ``||phi||_2 <= bound``."""
    if mode == "box":
        return np.clip(phi, -bound, bound)
    if mode == "l2":
        norm = np.linalg.norm(phi)
        return phi * (bound / norm) if norm > bound else phi
    raise ValueError(f"unknown clip mode {mode!r}")
