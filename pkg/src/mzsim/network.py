"""Interferometer topologies as directed component graphs.

Every edge carries a physical length; its flight time is ``length / C``.
Beam splitter ports are explicit: inputs 0 (a) and 1 (b), outputs 0 (c)
and 1 (d). All other components have a single input and output port 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Iterable, Mapping

from .optics import C, MIRROR_FACTOR, beam_splitter_factor

KINDS = ("source", "beam_splitter", "mirror", "aom", "delay_line", "detector")

# (max inputs, max outputs) per kind
_ARITY = {
    "source": (0, 1),
    "beam_splitter": (2, 2),
    "mirror": (1, 1),
    "aom": (1, 1),
    "delay_line": (1, 1),
    "detector": (1, 0),
}


# Node positions are snapped to this grid (about 1 nm) so segment lengths and
# their sums are exact in floating point.
_GRID = 2.0 ** -30


def _snap(x: float) -> float:
    return round(x / _GRID) * _GRID


class NetworkError(ValueError):
    """Invalid network geometry or topology."""


@dataclass(frozen=True)
class Component:
    id: str
    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise NetworkError(f"unknown component kind {self.kind!r}")
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    def factor(self, in_port: int, out_port: int) -> complex:
        """Static scattering factor from ``in_port`` to ``out_port``."""
        if self.kind == "beam_splitter":
            return beam_splitter_factor(in_port, out_port)
        if self.kind == "mirror":
            return MIRROR_FACTOR
        if self.kind == "delay_line":
            return cmath.exp(1j * self.params.get("phase", 0.0))
        return 1.0 + 0.0j

    @property
    def is_dynamic(self) -> bool:
        """True for components whose factor can change in time."""
        if self.kind == "aom":
            return True
        return self.kind == "delay_line" and self.params.get("drift_amplitude", 0.0) != 0.0


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    length: float
    src_port: int = 0
    dst_port: int = 0

    @property
    def delay(self) -> float:
        return self.length / C


@dataclass(frozen=True)
class OpticalNetwork:
    components: tuple[Component, ...]
    edges: tuple[Edge, ...]
    labels: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "labels", MappingProxyType(dict(self.labels)))
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise NetworkError("component ids must be unique")
        object.__setattr__(self, "_by_id", {c.id: c for c in self.components})

    def __getitem__(self, component_id: str) -> Component:
        try:
            return self._by_id[component_id]
        except KeyError:
            raise KeyError(f"no component {component_id!r} in network") from None

    def __contains__(self, component_id: str) -> bool:
        return component_id in self._by_id

    def of_kind(self, kind: str) -> list[Component]:
        return [c for c in self.components if c.kind == kind]

    @property
    def detectors(self) -> list[str]:
        return [c.id for c in self.of_kind("detector")]

    @property
    def sources(self) -> list[str]:
        return [c.id for c in self.of_kind("source")]

    def out_edges(self, component_id: str) -> list[Edge]:
        # sorted so that traversal order never depends on insertion order
        return sorted((e for e in self.edges if e.src == component_id),
                      key=lambda e: (e.src_port, e.dst, e.dst_port, e.length))

    def in_edges(self, component_id: str) -> list[Edge]:
        return sorted((e for e in self.edges if e.dst == component_id),
                      key=lambda e: (e.dst_port, e.src, e.src_port, e.length))

    def with_params(self, component_id: str, **params) -> "OpticalNetwork":
        """Copy of the network with ``component_id``'s params updated."""
        comp = self[component_id]
        new = replace(comp, params={**comp.params, **params})
        return replace(self, components=tuple(new if c.id == component_id else c
                                              for c in self.components))


def _topological_order(net: OpticalNetwork) -> list[str] | None:
    indeg = {c.id: 0 for c in net.components}
    for e in net.edges:
        if e.dst in indeg and e.src in indeg:
            indeg[e.dst] += 1
    ready = sorted(cid for cid, d in indeg.items() if d == 0)
    order = []
    while ready:
        cid = ready.pop(0)
        order.append(cid)
        for e in net.out_edges(cid):
            if e.dst not in indeg:
                continue
            indeg[e.dst] -= 1
            if indeg[e.dst] == 0:
                ready.append(e.dst)
                ready.sort()
    return order if len(order) == len(indeg) else None


def topological_order(net: OpticalNetwork) -> list[str]:
    order = _topological_order(net)
    if order is None:
        raise NetworkError("network contains a cycle")
    return order


def validate(net: OpticalNetwork) -> list[str]:
    """Return every violation found in ``net``; an empty list means valid."""
    problems = []
    ids = {c.id for c in net.components}
    for e in net.edges:
        for end in (e.src, e.dst):
            if end not in ids:
                problems.append(f"edge references unknown component {end!r}")
        if not (math.isfinite(e.length) and e.length > 0):
            problems.append(f"nonpositive length on edge {e.src}->{e.dst}: {e.length!r}")

    for comp in net.components:
        max_in, max_out = _ARITY[comp.kind]
        ins, outs = net.in_edges(comp.id), net.out_edges(comp.id)
        if comp.kind == "source" and ins:
            problems.append(f"source {comp.id} has incoming edges")
        if comp.kind == "detector" and outs:
            problems.append(f"detector {comp.id} has outgoing edges")
        if len(ins) > max_in and comp.kind != "source":
            problems.append(f"{comp.kind} {comp.id} has {len(ins)} inputs (max {max_in})")
        if len(outs) > max_out and comp.kind != "detector":
            problems.append(f"{comp.kind} {comp.id} has {len(outs)} outputs (max {max_out})")
        for direction, edges, port_of, n_ports in (
            ("input", ins, lambda e: e.dst_port, max(max_in, 1)),
            ("output", outs, lambda e: e.src_port, max(max_out, 1)),
        ):
            ports = [port_of(e) for e in edges]
            if any(p not in range(n_ports) for p in ports):
                problems.append(f"{comp.kind} {comp.id} uses invalid {direction} port")
            if len(set(ports)) != len(ports):
                problems.append(f"{comp.kind} {comp.id} has duplicate {direction} port")

    sources = net.sources
    if len(sources) != 1:
        problems.append(f"network needs exactly one source, found {len(sources)}")
    if not net.detectors:
        problems.append("network has no detector")

    if _topological_order(net) is None:
        problems.append("cycle detected")

    if sources:
        reached, stack = set(), list(sources)
        while stack:
            cid = stack.pop()
            if cid in reached:
                continue
            reached.add(cid)
            stack.extend(e.dst for e in net.out_edges(cid))
        for det in net.detectors:
            if det not in reached:
                problems.append(f"unreachable detector {det}")
    return problems


def require_valid(net: OpticalNetwork) -> OpticalNetwork:
    problems = validate(net)
    if problems:
        raise NetworkError("invalid network: " + "; ".join(problems))
    return net


@dataclass(frozen=True)
class PathRecord:
    """One simple source-to-detector path.

    ``hops`` lists ``(component_id, in_port, out_port)`` in order and
    ``delays_to_end[i]`` is the flight time from component ``i`` to the
    detector along this path.
    """

    hops: tuple[tuple[str, int | None, int | None], ...]
    edges: tuple[Edge, ...]
    total_delay: float
    static_amplitude: complex
    delays_to_end: tuple[float, ...]

    @property
    def component_ids(self) -> tuple[str, ...]:
        return tuple(h[0] for h in self.hops)

    def delay_from(self, component_id: str) -> float:
        return self.delays_to_end[self.component_ids.index(component_id)]


def _make_record(net: OpticalNetwork, hops, edges) -> PathRecord:
    amp = 1.0 + 0.0j
    for cid, pin, pout in hops:
        if pin is not None and pout is not None:
            amp *= net[cid].factor(pin, pout)
    lengths = [e.length for e in edges]
    total = math.fsum(lengths) / C
    # delay to end from each hop: suffix sums of the edge lengths after it
    delays = tuple(math.fsum(lengths[i:]) / C for i in range(len(hops)))
    return PathRecord(tuple(hops), tuple(edges), total, amp, delays)


def enumerate_paths(net: OpticalNetwork, detector_id: str, start: str | None = None) -> list[PathRecord]:
    """All simple paths from the source (or ``start``) to ``detector_id``.

    Exhaustive DFS; the networks here are tiny. Static amplitudes take every
    AOM as fully on.
    """
    if detector_id not in net:
        raise KeyError(f"unknown detector {detector_id!r}")
    if start is None:
        sources = net.sources
        if len(sources) != 1:
            raise NetworkError("enumerate_paths needs exactly one source")
        start = sources[0]

    records = []

    def dfs(cid, in_port, hops, edges, visited):
        if cid == detector_id:
            records.append(_make_record(net, hops + [(cid, in_port, None)], edges))
            return
        for e in net.out_edges(cid):
            if e.dst in visited:
                continue
            dfs(e.dst, e.dst_port, hops + [(cid, in_port, e.src_port)], edges + [e], visited | {e.dst})

    dfs(start, None, [], [], {start})
    return records


def build_mzi(arm_length: float = 15.0, aom_positions: tuple[float, float] = (0.0, 0.0),
              balanced: bool = True, imbalance: float = 0.0, standoff: float = 1e-3,
              arm_phase: float = 0.0, drift_amplitude: float = 0.0, drift_period: float = 1.0,
              fiber: bool = False) -> OpticalNetwork:
    """Mach-Zehnder interferometer with one AOM in each arm.

    ``arm_length`` is the source-to-detector flight length along either arm.
    The splitters sit ``standoff`` from the source and from the detectors, and
    each AOM sits ``standoff`` past its nominal position (measured from BS1)
    so that no edge has zero length. Arm A carries ``aom1`` and enters BS2 at
    port b; arm B carries ``aom2``, the phase shifter ``phase``, and enters
    BS2 at port a. With this wiring the balanced interferometer is bright at
    ``det1`` and dark at ``det2``.

    ``fiber=True`` gives the coupler variant: no mirrors, and the phase
    shifter may carry a slow sinusoidal drift.
    """
    if not arm_length > 0 or not standoff > 0:
        raise NetworkError("arm_length and standoff must be > 0")
    if balanced and imbalance != 0.0:
        raise NetworkError("a balanced interferometer cannot have an imbalance")
    if imbalance < 0:
        raise NetworkError("imbalance must be >= 0")
    arm_length, standoff, imbalance = _snap(arm_length), _snap(standoff), _snap(imbalance)
    inner = arm_length - 2 * standoff  # BS1 -> BS2
    if inner <= 2 * standoff:
        raise NetworkError("arm_length too short for the standoff")
    aom_positions = tuple(aom_positions)
    if len(aom_positions) != 2:
        raise NetworkError("need exactly two AOM positions")

    comps = [
        Component("source", "source"),
        Component("bs1", "beam_splitter", {"coupler": float(fiber)}),
        Component("bs2", "beam_splitter", {"coupler": float(fiber)}),
        Component("aom1", "aom"),
        Component("aom2", "aom"),
        Component("phase", "delay_line", {"phase": arm_phase, "drift_amplitude": drift_amplitude,
                                          "drift_period": drift_period}),
        Component("det1", "detector"),
        Component("det2", "detector"),
    ]
    if not fiber:
        comps += [Component("mirror_a", "mirror"), Component("mirror_b", "mirror")]

    edges = [Edge("source", "bs1", standoff)]
    # arm elements as (position from BS1, id); the phase shifter only on arm B
    arms = {
        "a": ([(_snap(aom_positions[0] + standoff), "aom1")], 0, 1),
        "b": ([(_snap(aom_positions[1] + standoff), "aom2")], 1, 0),
    }
    mirror_pos = _snap(inner / 2)
    for arm, (elements, bs1_port, bs2_port) in arms.items():
        pos, _ = elements[0]
        if not 0 < pos < inner - standoff:
            raise NetworkError(f"AOM in arm {arm} lies outside the arm")
        if not fiber:
            if abs(pos - mirror_pos) < standoff:
                raise NetworkError(f"AOM in arm {arm} collides with the mirror")
            elements.append((mirror_pos, f"mirror_{arm}"))
        if arm == "b":
            phase_pos = _snap((max(p for p, _ in elements) + inner) / 2)
            elements.append((phase_pos, "phase"))
        elements.sort()
        arm_inner = inner + (imbalance if arm == "b" else 0.0)
        prev, prev_pos, src_port = "bs1", 0.0, bs1_port
        for p, cid in elements:
            edges.append(Edge(prev, cid, p - prev_pos, src_port=src_port))
            prev, prev_pos, src_port = cid, p, 0
        edges.append(Edge(prev, "bs2", arm_inner - prev_pos, src_port=0, dst_port=bs2_port))

    edges.append(Edge("bs2", "det1", standoff, src_port=0))
    edges.append(Edge("bs2", "det2", standoff, src_port=1))
    labels = {"det1": "power meter 1", "det2": "power meter 2"}
    return require_valid(OpticalNetwork(tuple(comps), tuple(edges), labels))


def build_single_arm(length: float = 15.0) -> OpticalNetwork:
    """Source -> AOM -> detector, a network with exactly one path."""
    return require_valid(OpticalNetwork(
        (Component("source", "source"), Component("aom1", "aom"), Component("det1", "detector")),
        (Edge("source", "aom1", length / 2), Edge("aom1", "det1", length / 2)),
        {"det1": "power meter 1"},
    ))


def network_from_parts(components: Iterable[Component], edges: Iterable[Edge],
                       labels: Mapping[str, str] | None = None) -> OpticalNetwork:
    return require_valid(OpticalNetwork(tuple(components), tuple(edges), dict(labels or {})))
