#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
归一化熵与提前退出判定

熵用自然对数计算并除以 ln K，阈值落在 [0, 1] 区间。
"""

import math
from typing import Sequence

import numpy as np
from scipy.special import entr

from sim.errors import DomainError

# 概率和允许的误差
NORMALIZATION_TOLERANCE = 1e-9


def _as_distribution(probs: Sequence[float]) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DomainError("probability vector must cover K >= 2 classes")
    if not np.all(np.isfinite(p)):
        raise DomainError("probability vector contains non-finite entries")
    if np.any(p < 0):
        raise DomainError("probability vector contains negative entries")
    if abs(p.sum() - 1.0) > NORMALIZATION_TOLERANCE:
        raise DomainError(f"probabilities sum to {p.sum():.12g}, not 1")
    return p


def normalized_entropy(probs: Sequence[float]) -> float:
    """
    H(p) / ln K，约定 0·ln0 = 0

    Raises:
        DomainError: 含负数、非有限值，或和不为1
    """
    p = _as_distribution(probs)
    return float(np.sum(entr(p))) / math.log(p.size)


def entropy_rows(matrix: np.ndarray) -> np.ndarray:
    """逐行计算归一化熵（每行一个样本的分布）"""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[1] < 2:
        raise DomainError("expected an (N, K) matrix with K >= 2")
    if np.any(m < 0) or np.any(np.abs(m.sum(axis=1) - 1.0) > NORMALIZATION_TOLERANCE):
        raise DomainError("every row must be a probability distribution")
    return np.sum(entr(m), axis=1) / math.log(m.shape[1])


def exits_below(probs: Sequence[float], threshold: float) -> bool:
    """熵严格小于阈值才退出，等于阈值不退出"""
    return normalized_entropy(probs) < threshold
