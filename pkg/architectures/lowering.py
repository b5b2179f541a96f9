"""
Lowering
--------
Schedules back into noisy circuits: every idle stretch of a live qubit
becomes a resolved ``Idle`` marker in front of the qubit's next operation
(or at the end), then the multi-channel model is attached.  Recooling and
transport only lengthen those stretches; they carry no channel of their own.

Usage:
    noisy = lower_to_noisy_circuit(transpile_circuit(circuit, "AbaQusS", "current"), params)
    model = ArchitectureModel("AbaQusA", "current", t2=2.0)
    tree  = model.attach_tree(gen_teleport_ls("0"))
"""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Mapping

from architectures.models import Architecture, TimingScenario
from architectures.transpiler import Schedule, resolve, transpile_circuit
from circuits.circuit import Circuit
from circuits.instructions import Idle
from noise.models import MultiChannelParams, NoiseModel, load_noise_parameters, multichannel_attach

logger = logging.getLogger(__name__)

_US = 1e-6


def resolve_idles(schedule: Schedule) -> Circuit:
    """The scheduled circuit with its idle markers replaced by timed ones (seconds)."""
    circuit = schedule.circuit
    before  = defaultdict(list)
    after   = []
    for q, start, end, index in schedule.gaps():
        idle = Idle((q,), (end - start) * _US)
        (after if index is None else before[index]).append(idle)

    out = []
    for index, ins in enumerate(circuit.instructions):
        if isinstance(ins, Idle):
            continue
        out.extend(before.get(index, ()))
        out.append(ins)
    out.extend(after)
    return circuit.with_instructions(out)


def lower_to_noisy_circuit(schedule: Schedule, params: MultiChannelParams,
                           neighbours: Mapping[int, tuple[int, ...]] | None = None) -> Circuit:
    circuit = schedule.circuit
    if circuit.noiseless:
        return multichannel_attach(circuit, params)
    if neighbours is None:
        neighbours = schedule.arch.crosstalk_neighbours(schedule.placement)
    noisy = multichannel_attach(resolve_idles(schedule), params, neighbours)
    logger.debug(f"🔧 Lowered '{circuit.name}' ({schedule.duration:.1f} µs) with {noisy.noise_tag}")
    return noisy


class ArchitectureModel(NoiseModel):
    """Transpile every node circuit on an architecture, then attach its multi-channel noise."""

    def __init__(self, arch: Architecture | str, scenario: TimingScenario | str, *,
                 t2: float | None = None, params: MultiChannelParams | None = None):
        self.arch, self.scenario = resolve(arch, scenario)
        self.params = params or load_noise_parameters(self.arch.kind, self.scenario.tag, t2=t2)
        self.tag    = f"{self.arch.kind}_{self.scenario.tag}_t2_{self.params.t2:g}"

    def attach(self, circuit: Circuit) -> Circuit:
        if circuit.noiseless:
            return multichannel_attach(circuit, self.params)
        return lower_to_noisy_circuit(transpile_circuit(circuit, self.arch, self.scenario), self.params)
