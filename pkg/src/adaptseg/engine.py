"""Iterative greedy refinement of pixel partitions.

The engine maintains one partition (vector mode: every region carries a
full color) or one partition per channel (multiscalar mode: each channel
is segmented on its own), plus a cache holding the best known cut for
every live region.  A step commits the cached cut with the largest exact
indicator, then re-evaluates candidates only for the regions the split
created; everything else is untouched, which keeps the per-step cost
proportional to the split region's size.

Multiscalar commit policies:

* best-component-only: commit only the channel whose tentative split
  wins (one scalar region added);
* best-component-for-each: commit every channel's tentative split
  (one scalar region added per still-splittable channel);
* combine-best-components: superimpose all tentative cuts and apply the
  common refinement to every channel partition, which requires the
  channel partitions to coincide and keeps them coinciding.

j_current is always recomputed from the per-region misfit table (exact
summation), so the reported J never drifts from the partitions it
describes; at full convergence every region misfit is exactly 0.0 and
so is J.
"""

import math
from dataclasses import dataclass

import numpy as np

from .partition import ExplicitMask, Partition, stats_for_pixels, superimposed_region_count
from .strategies import BestInFamily, OverallBest, evaluate

RUNNING = "running"
CONVERGED = "converged"
STALLED = "stalled"

VECTOR = "vector"
MULTISCALAR = "multiscalar"

BEST_COMPONENT_ONLY = "best-component-only"
BEST_COMPONENT_FOR_EACH = "best-component-for-each"
COMBINE_BEST_COMPONENTS = "combine-best-components"
MULTISCALAR_STRATEGIES = (
    BEST_COMPONENT_ONLY,
    BEST_COMPONENT_FOR_EACH,
    COMBINE_BEST_COMPONENTS,
)

SNAPSHOT_INTERVAL = 64


class EngineStateError(RuntimeError):
    """Operation invalid in the engine's current state."""


def cutting_from_label(label):
    if label == "overall-best":
        return OverallBest()
    if label == "family-all":
        return BestInFamily("all")
    if label == "family-midpoints":
        return BestInFamily("midpoints")
    raise ValueError(f"unknown cutting strategy {label!r}")


@dataclass(frozen=True)
class SplitEvent:
    """One committed split.  strategy is the column reported in traces
    (cutting strategy in vector mode, commit policy in multiscalar mode);
    cutting always records the cutting strategy so a run can be replayed
    even if strategies were switched between steps."""

    iteration: int
    mode: str
    strategy: str
    cutting: str
    channel: str
    region_split: int
    cut: str
    delta_j: float
    n_sr: int
    n_vr: int
    j: float
    tau: float


@dataclass
class StopCriterion:
    """Stop as soon as any set bound is reached; checked between steps."""

    target_vr: int = None
    target_sr: int = None
    target_tau: float = None
    max_iterations: int = None
    j_epsilon: float = None

    def validate(self):
        values = (self.target_vr, self.target_sr, self.target_tau,
                  self.max_iterations, self.j_epsilon)
        if all(v is None for v in values):
            raise ValueError("at least one stop criterion must be set")

    def satisfied(self, engine):
        if self.target_vr is not None and engine.n_vr() >= self.target_vr:
            return True
        if self.target_sr is not None and engine.n_sr() >= self.target_sr:
            return True
        if self.target_tau is not None and engine.tau() >= self.target_tau:
            return True
        if self.max_iterations is not None and engine.iteration >= self.max_iterations:
            return True
        if self.j_epsilon is not None and engine.j_current() <= self.j_epsilon:
            return True
        return False


@dataclass
class _Snapshot:
    iteration: int
    parts: list
    caches: list
    history_len: int
    coincident: bool
    status: str


def partition_from_labels(img, labels):
    """Build a Partition from an arbitrary label array; ids are compacted
    to 0..m-1 in ascending original-label order."""
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.shape[0] != img.pixel_count:
        raise ValueError("label array does not match the image size")
    uniq, inverse = np.unique(labels, return_inverse=True)
    new_labels = inverse.astype(np.int64)
    order = np.argsort(inverse, kind="stable").astype(np.int64)
    counts = np.bincount(inverse, minlength=len(uniq))
    groups = np.split(order, np.cumsum(counts)[:-1])
    regions = {}
    pixels = {}
    for region_id, idx in enumerate(groups):
        regions[region_id] = stats_for_pixels(img, idx)
        pixels[region_id] = idx
    return Partition(img.width, img.height, new_labels, regions, pixels, len(uniq))


class Segmentation:
    """Drives refinement on one image.

    rescan=True disables the candidate cache and re-evaluates every
    region at each step; selection logic is otherwise identical, so it
    serves as the slow reference the cached engine is tested against.
    """

    def __init__(self, img, mode=VECTOR, cutting=None, multiscalar=None,
                 initial_labels=None, rescan=False):
        if mode not in (VECTOR, MULTISCALAR):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == MULTISCALAR:
            if multiscalar not in MULTISCALAR_STRATEGIES:
                raise ValueError(f"unknown multiscalar strategy {multiscalar!r}")
        elif multiscalar is not None:
            raise ValueError("multiscalar strategy is only valid in multiscalar mode")
        self.img = img
        self.mode = mode
        self.cutting = cutting if cutting is not None else OverallBest()
        self.multiscalar = multiscalar
        self.rescan = rescan
        if mode == VECTOR:
            self.channel_sets = [tuple(range(img.channel_count))]
        else:
            self.channel_sets = [(k,) for k in range(img.channel_count)]
        if initial_labels is None:
            self.partitions = [Partition.single_region(img)
                               for _ in self.channel_sets]
        else:
            # One label array shared by all channels, so a combine run can
            # start from it: the channel partitions coincide by construction.
            self.partitions = [partition_from_labels(img, initial_labels)
                               for _ in self.channel_sets]
        self.coincident = True
        self.iteration = 0
        self.history = []
        self.status = RUNNING
        self._d_norm = img.norm()
        self.caches = [
            {rid: evaluate(img, part, rid, self.cutting, channels)
             for rid in sorted(part.regions)}
            for part, channels in zip(self.partitions, self.channel_sets)
        ]
        self._update_status()
        self._snapshots = [self._snapshot()]

    # -- bookkeeping ---------------------------------------------------

    def j_current(self):
        """Misfit summed over all regions of all active partitions."""
        terms = []
        for part, channels in zip(self.partitions, self.channel_sets):
            if len(channels) == self.img.channel_count:
                terms.extend(r.misfit for r in part.regions.values())
            else:
                k = channels[0]
                terms.extend(r.misfit_channel(k) for r in part.regions.values())
        return math.fsum(terms)

    def n_sr(self):
        """Scalar region count: each vector region counts once per channel."""
        total = 0
        for part, channels in zip(self.partitions, self.channel_sets):
            total += part.region_count * len(channels)
        return total

    def n_vr(self):
        """Uniform-color region count: regions of the common refinement of
        the channel partitions (the partition itself in vector mode)."""
        if len(self.partitions) == 1 or self.coincident:
            return self.partitions[0].region_count
        return superimposed_region_count(self.partitions)

    def tau_from_j(self, j):
        """Percentage of explained data: 100 * (1 - ||d - c|| / ||d||),
        clamped to [0, 100].  An all-zero image explains itself (100) only
        at zero misfit."""
        if self._d_norm == 0.0:
            return 100.0 if j <= 0.0 else 0.0
        value = 100.0 * (1.0 - math.sqrt(2.0 * j) / self._d_norm)
        return min(100.0, max(0.0, value))

    def tau(self):
        return self.tau_from_j(self.j_current())

    def segmented_planes(self):
        """Current per-channel segmented colors (each channel painted from
        its own partition)."""
        if self.mode == VECTOR:
            return self.partitions[0].paint(self.img)
        planes = [None] * self.img.channel_count
        for part, channels in zip(self.partitions, self.channel_sets):
            k = channels[0]
            planes[k] = part.paint(self.img)[k]
        return planes

    def _chan_label(self, channels):
        names = self.img.channel_names
        if len(channels) == len(names):
            return "RGB" if len(names) == 3 else names[0]
        return names[channels[0]]

    def _update_status(self):
        for cache in self.caches:
            for cand in cache.values():
                if cand.delta_j > 0.0:
                    self.status = RUNNING
                    return
        for part, channels in zip(self.partitions, self.channel_sets):
            for stats in part.regions.values():
                if stats.pixel_count >= 2 and any(
                        not stats.constant_in(k) for k in channels):
                    self.status = STALLED
                    return
        self.status = CONVERGED

    def _snapshot(self):
        return _Snapshot(
            iteration=self.iteration,
            parts=[p.copy() for p in self.partitions],
            caches=[dict(c) for c in self.caches],
            history_len=len(self.history),
            coincident=self.coincident,
            status=self.status,
        )

    def _restore(self, snap):
        self.partitions = [p.copy() for p in snap.parts]
        self.caches = [dict(c) for c in snap.caches]
        self.iteration = snap.iteration
        self.history = self.history[:snap.history_len]
        self.coincident = snap.coincident
        self.status = snap.status

    def _rebuild_caches(self):
        self.caches = [
            {rid: evaluate(self.img, part, rid, self.cutting, channels)
             for rid in sorted(part.regions)}
            for part, channels in zip(self.partitions, self.channel_sets)
        ]

    def _refresh(self, pi, region_id):
        self.caches[pi][region_id] = evaluate(
            self.img, self.partitions[pi], region_id,
            self.cutting, self.channel_sets[pi])

    def set_cutting(self, cutting):
        """Switch the cutting strategy between steps.  The strategy defines
        every region's candidate, so the cache is rebuilt."""
        if cutting.label == self.cutting.label:
            return
        self.cutting = cutting
        self._rebuild_caches()
        self._update_status()

    def set_multiscalar(self, strategy):
        """Switch the multiscalar commit policy between steps.  Candidates
        are unaffected; combine additionally needs coinciding partitions."""
        if self.mode != MULTISCALAR:
            raise EngineStateError("not a multiscalar run")
        if strategy not in MULTISCALAR_STRATEGIES:
            raise ValueError(f"unknown multiscalar strategy {strategy!r}")
        if strategy == COMBINE_BEST_COMPONENTS and not self.coincident:
            raise EngineStateError(
                "combine-best-components requires coinciding channel partitions")
        self.multiscalar = strategy

    def _select_best(self, pi):
        """Cached candidate with the largest positive exact indicator;
        ties go to the smaller region id."""
        best = None
        for rid in sorted(self.caches[pi]):
            cand = self.caches[pi][rid]
            if cand.delta_j > 0.0 and (best is None or cand.delta_j > best.delta_j):
                best = cand
        return best

    def _event(self, strategy, channel, region_id, cut_text, delta):
        j = self.j_current()
        return SplitEvent(
            iteration=self.iteration,
            mode=self.mode,
            strategy=strategy,
            cutting=self.cutting.label,
            channel=channel,
            region_split=region_id,
            cut=cut_text,
            delta_j=delta,
            n_sr=self.n_sr(),
            n_vr=self.n_vr(),
            j=j,
            tau=self.tau_from_j(j),
        )

    # -- stepping ------------------------------------------------------

    def step(self):
        """Commit one refinement iteration; returns the SplitEvents it
        produced (empty when the run is converged or stalled)."""
        if self.status != RUNNING:
            return []
        if self.rescan:
            self._rebuild_caches()
        if self.mode == VECTOR:
            events = self._step_vector()
        else:
            events = self._step_multiscalar()
        if events:
            self.history.extend(events)
            if self.iteration % SNAPSHOT_INTERVAL == 0:
                self._snapshots.append(self._snapshot())
            self._update_status()
        return events

    def _commit(self, pi, region_id, cut):
        part = self.partitions[pi]
        id_plus, id_minus = part.split(region_id, cut, self.img)
        del self.caches[pi][region_id]
        self._refresh(pi, id_plus)
        self._refresh(pi, id_minus)
        return id_plus, id_minus

    def _step_vector(self):
        best = self._select_best(0)
        if best is None:
            self._update_status()
            return []
        self.iteration += 1
        self._commit(0, best.region, best.cut)
        event = self._event(self.cutting.label,
                            self._chan_label(self.channel_sets[0]),
                            best.region, best.cut.describe(), best.delta_j)
        return [event]

    def _step_multiscalar(self):
        tentative = [self._select_best(pi) for pi in range(len(self.partitions))]
        if all(t is None for t in tentative):
            self._update_status()
            return []
        if self.multiscalar == COMBINE_BEST_COMPONENTS:
            return self._commit_combined(tentative)
        names = self.img.channel_names
        if self.multiscalar == BEST_COMPONENT_ONLY:
            winner = None
            for pi, cand in enumerate(tentative):
                if cand is not None and (winner is None
                                         or cand.delta_j > tentative[winner].delta_j):
                    winner = pi
            tentative = [cand if pi == winner else None
                         for pi, cand in enumerate(tentative)]
        self.iteration += 1
        if len(self.partitions) > 1:
            self.coincident = False
        events = []
        for pi, cand in enumerate(tentative):
            if cand is None:
                continue
            self._commit(pi, cand.region, cand.cut)
            events.append(self._event(self.multiscalar, names[pi],
                                      cand.region, cand.cut.describe(),
                                      cand.delta_j))
        return events

    def _commit_combined(self, tentative):
        """Superimpose the tentative per-channel cuts and apply the common
        refinement to every channel partition."""
        if not self.coincident:
            raise EngineStateError(
                "combine-best-components requires coinciding channel partitions")
        self.iteration += 1
        names = self.img.channel_names
        by_region = {}
        for pi, cand in enumerate(tentative):
            if cand is not None:
                by_region.setdefault(cand.region, []).append((pi, cand))
        events = []
        for region_id in sorted(by_region):
            contributors = by_region[region_id]
            base = self.partitions[0]
            key = np.zeros(base.regions[region_id].pixel_count, dtype=np.int64)
            for pi, cand in contributors:
                mask = self.partitions[pi].cut_mask(region_id, cand.cut, self.img)
                key = (key << 1) | mask.astype(np.int64)
            # Descending key order: the all-plus cell is carved out first,
            # so with a single contributor the ids match a plain sign split.
            cells = np.unique(key)[::-1]
            before = math.fsum(
                self.partitions[pi].regions[region_id].misfit_channel(channels[0])
                for pi, channels in enumerate(self.channel_sets))
            leaves = self._split_cells(region_id, key, cells)
            after = math.fsum(
                self.partitions[pi].regions[leaf].misfit_channel(channels[0])
                for pi, channels in enumerate(self.channel_sets)
                for leaf in leaves)
            for pi in range(len(self.partitions)):
                del self.caches[pi][region_id]
                for leaf in leaves:
                    self._refresh(pi, leaf)
            cut_text = "combine[" + "+".join(
                f"{names[pi]}:{cand.cut.describe()}" for pi, cand in contributors
            ) + "]"
            delta = before - after
            events.append(self._event(self.multiscalar, self._chan_label(
                tuple(range(self.img.channel_count))), region_id, cut_text, delta))
        return events

    def _split_cells(self, region_id, key, cells):
        """Split region_id of every channel partition into the cells given
        by the key array (aligned with the region's pixels in ascending
        order).  Region ids evolve identically across partitions because
        they coincide.  Returns the leaf ids."""
        leaves = []
        rest_ids = [region_id] * len(self.partitions)
        rest_key = key
        for cell in cells[:-1]:
            mask = (rest_key == cell).astype(np.uint8)
            cut = ExplicitMask(mask)
            for pi in range(len(self.partitions)):
                id_cell, id_rest = self.partitions[pi].split(
                    rest_ids[pi], cut, self.img)
                rest_ids[pi] = id_rest
            leaves.append(id_cell)
            rest_key = rest_key[mask == 0]
        leaves.append(rest_ids[0])
        return leaves

    # -- driving -------------------------------------------------------

    def run(self, stop):
        """Step until a stop criterion fires or the run ends on its own.

        Returns "stopped" when a criterion fired, otherwise the terminal
        engine status ("converged" or "stalled")."""
        stop.validate()
        while True:
            if stop.satisfied(self):
                return "stopped"
            if self.status != RUNNING:
                return self.status
            if not self.step():
                return self.status

    def undo(self, count=1):
        """Revert the last `count` iterations by replaying from the
        nearest snapshot; the result is bit-identical to the state before
        those iterations."""
        if count < 1:
            raise ValueError("undo count must be >= 1")
        target = self.iteration - count
        if target < 0:
            if self.iteration == 0:
                raise EngineStateError("nothing to undo")
            raise EngineStateError(
                f"cannot undo {count} iterations; only {self.iteration} recorded")
        events = self.history
        snap = None
        for candidate in self._snapshots:
            if candidate.iteration <= target and (
                    snap is None or candidate.iteration > snap.iteration):
                snap = candidate
        self._restore(snap)
        self._snapshots = [s for s in self._snapshots
                           if s.iteration <= snap.iteration]
        self.replay_recorded(events, target)

    def replay_recorded(self, events, upto):
        """Re-run iterations self.iteration+1 .. upto with the strategies
        each recorded event used; the user's current strategy selection is
        restored afterwards."""
        saved_cutting = self.cutting
        saved_multiscalar = self.multiscalar
        try:
            for it in range(self.iteration + 1, upto + 1):
                its_events = [e for e in events if e.iteration == it]
                if not its_events:
                    raise EngineStateError(f"no recorded events for iteration {it}")
                self.set_cutting(cutting_from_label(its_events[0].cutting))
                if self.mode == MULTISCALAR:
                    self.multiscalar = its_events[0].strategy
                if not self.step():
                    raise EngineStateError(f"replay stalled at iteration {it}")
        finally:
            if saved_cutting.label != self.cutting.label:
                self.set_cutting(saved_cutting)
            self.multiscalar = saved_multiscalar
