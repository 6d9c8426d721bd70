"""Record of the proposals used so far and their empirical mixture density.

q_bar(x) = sum_k (N_k / N_tot) * q_k(x), the balance-heuristic denominator.
Mixture snapshots that share a pilot array, bandwidth and support box are
folded into a single weighted kernel sum, so evaluating q_bar costs one pass
over the pilot per distinct pilot rather than one per iteration.
"""

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, List, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from ..inputs.density import InputDensity
from ..proposal.kde import Box, log_kernel_sum
from ..proposal.mixture import MixtureProposal
from ..utils.arrays import as_points, unwrap
from ..utils.config import WEIGHT_FLOOR
from ..utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

# Marker for the input density itself as a history entry
INPUT_DENSITY = "p"


@dataclass(frozen=True)
class HistoryEntry:
    proposal: Any
    count: int


@dataclass
class _KernelGroup:
    pilot: np.ndarray
    bandwidth: float
    scaler: Any
    support: Optional[Box]
    weights: np.ndarray


def _is_input_density(proposal) -> bool:
    return isinstance(proposal, str) and proposal == INPUT_DENSITY


def _support_key(support: Optional[Box]):
    if support is None:
        return None
    return (support[0].tobytes(), support[1].tobytes())


class ProposalHistory:
    """Ordered (proposal, count) pairs, starting with the input density.

    Proposals other than the marker need ``log_density(x)`` and
    ``sample(rng, n)``; ``MixtureProposal`` entries get the aggregated path.
    """

    def __init__(self, input_density: InputDensity, initial_count: int):
        if initial_count < 1:
            raise InvalidArgumentError(f"initial count must be >= 1, got {initial_count}")
        self._density = input_density
        self._entries: List[HistoryEntry] = [HistoryEntry(INPUT_DENSITY, int(initial_count))]
        self._compiled = None

    @property
    def input_density(self) -> InputDensity:
        return self._density

    @property
    def entries(self) -> Tuple[HistoryEntry, ...]:
        return tuple(self._entries)

    @property
    def counts(self) -> np.ndarray:
        return np.array([e.count for e in self._entries], dtype=int)

    @property
    def total(self) -> int:
        return int(sum(e.count for e in self._entries))

    @property
    def proportions(self) -> np.ndarray:
        counts = self.counts
        return counts / counts.sum()

    def __len__(self) -> int:
        return len(self._entries)

    def append(self, proposal, count: int) -> int:
        """Add an entry; returns its index."""
        if count < 1:
            raise InvalidArgumentError(f"history counts must be >= 1, got {count}")
        self._entries.append(HistoryEntry(proposal, int(count)))
        self._compiled = None
        return len(self._entries) - 1

    # ── Density ──────────────────────────────────────────────────────────────

    def _compile(self):
        total = self.total
        p_coef = 0.0
        groups: "OrderedDict[tuple, _KernelGroup]" = OrderedDict()
        others = []
        for entry in self._entries:
            share = entry.count / total
            proposal = entry.proposal
            if _is_input_density(proposal):
                p_coef += share
            elif isinstance(proposal, MixtureProposal):
                eta = proposal.exploration_weight
                p_coef += share * eta
                if eta < 1.0:
                    kde = proposal.kde
                    key = (id(kde.pilot_points), kde.bandwidth, id(kde.scaler), _support_key(kde.support))
                    group = groups.get(key)
                    if group is None:
                        group = _KernelGroup(kde.pilot_points, kde.bandwidth, kde.scaler, kde.support, np.zeros(kde.size))
                        groups[key] = group
                    # Restricted snapshots carry 1 / (in-box mass) on every kernel
                    scale = share * (1.0 - eta) * math.exp(-kde.log_mass)
                    group.weights[kde.active_indices] += scale * kde.active_weights
            else:
                others.append((math.log(share), proposal))
        kernel_terms = []
        for group in groups.values():
            m = len(group.weights)
            active = np.flatnonzero(group.weights >= WEIGHT_FLOOR / m)
            kernel_terms.append((group.pilot[active], np.log(group.weights[active]), group.bandwidth, group.scaler, group.support))
        self._compiled = (p_coef, kernel_terms, others)
        logger.debug(
            "[history] Compiled %d entries into %d kernel group(s) and %d other proposal(s).",
            len(self._entries), len(kernel_terms), len(others),
        )
        return self._compiled

    def log_density(self, x):
        """log q_bar(x), accumulated in log space."""
        pts, single = as_points(x, self._density.dimension)
        p_coef, kernel_terms, others = self._compiled or self._compile()
        terms = []
        if p_coef > 0:
            terms.append(math.log(p_coef) + self._density.log_density(pts))
        for centers, log_w, h, scaler, support in kernel_terms:
            z = scaler.to_unit(pts)
            term = log_kernel_sum(z, centers, log_w, h) - scaler.log_jacobian
            if support is not None:
                inside = np.all((z >= support[0]) & (z <= support[1]), axis=1)
                term = np.where(inside, term, -np.inf)
            terms.append(term)
        for log_share, proposal in others:
            terms.append(log_share + np.asarray(proposal.log_density(pts), dtype=float))
        if len(terms) == 1:
            out = terms[0]
        else:
            out = logsumexp(np.vstack(terms), axis=0)
        return unwrap(out, single)

    def density(self, x):
        return np.exp(self.log_density(x))

    def entry_log_density(self, k: int, x) -> np.ndarray:
        """log q_k(x) for a single entry."""
        pts, _ = as_points(x, self._density.dimension)
        proposal = self._entries[k].proposal
        if _is_input_density(proposal):
            return np.asarray(self._density.log_density(pts), dtype=float)
        return np.asarray(proposal.log_density(pts), dtype=float).reshape(-1)

    # ── Sampling ─────────────────────────────────────────────────────────────

    def allocate(self, n: int) -> np.ndarray:
        """Split ``n`` draws across entries in proportion to their counts (largest remainder)."""
        if n < 0:
            raise InvalidArgumentError(f"sample count must be >= 0, got {n}")
        quotas = n * self.counts / self.total
        alloc = np.floor(quotas).astype(int)
        remainder = n - int(alloc.sum())
        if remainder:
            order = np.argsort(-(quotas - alloc), kind="stable")
            alloc[order[:remainder]] += 1
        return alloc

    def sample(self, rng: np.random.Generator, n: int):
        """Draw ``n`` points with the history's mixture proportions.

        Returns:
            Points (n, d) and the generating entry index of each point.
        """
        alloc = self.allocate(n)
        blocks, index = [], []
        for k, (entry, n_k) in enumerate(zip(self._entries, alloc)):
            if n_k == 0:
                continue
            if _is_input_density(entry.proposal):
                blocks.append(self._density.sample(rng, int(n_k)))
            else:
                blocks.append(np.asarray(entry.proposal.sample(rng, int(n_k)), dtype=float))
            index.append(np.full(n_k, k, dtype=int))
        if not blocks:
            return np.empty((0, self._density.dimension)), np.empty(0, dtype=int)
        return np.vstack(blocks), np.concatenate(index)


class MixtureDensityCache:
    """log q_bar at a growing set of points, kept current as the history grows.

    When entries are appended, only the new entries are evaluated at the
    points already held and the old mixture is rescaled by its share of the
    new total; new points get the full mixture in one folded pass. The
    per-iteration cost therefore depends on the newest proposal, not on the
    length of the history.
    """

    def __init__(self, history: ProposalHistory):
        self._history = history
        self._x = np.empty((0, history.input_density.dimension))
        self._log_q = np.empty(0)
        self._seen = len(history)
        self._total = history.total

    def __len__(self) -> int:
        return len(self._log_q)

    @property
    def points(self) -> np.ndarray:
        return self._x

    def _catch_up(self) -> None:
        history = self._history
        if self._seen == len(history):
            return
        entries = history.entries
        total = history.total
        if len(self._x):
            terms = [self._log_q + math.log(self._total / total)]
            for k in range(self._seen, len(entries)):
                terms.append(math.log(entries[k].count / total) + history.entry_log_density(k, self._x))
            self._log_q = logsumexp(np.vstack(terms), axis=0)
        self._seen = len(entries)
        self._total = total

    def extend(self, x) -> None:
        """Bring cached points up to date, then add ``x``."""
        self._catch_up()
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        if len(pts) == 0:
            return
        fresh = np.asarray(self._history.log_density(pts), dtype=float).reshape(-1)
        self._x = np.vstack([self._x, pts])
        self._log_q = np.concatenate([self._log_q, fresh])

    def log_density(self) -> np.ndarray:
        """log q_bar at every cached point, in insertion order."""
        self._catch_up()
        return self._log_q.copy()


def mixture_density_bar_q(history: ProposalHistory, x, log: bool = False):
    """q_bar(x), or log q_bar(x) with ``log=True``."""
    return history.log_density(x) if log else history.density(x)
