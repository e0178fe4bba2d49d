"""Canonical firing-regime demonstrations on both backends.

Six parameter sets cover the classic response classes: regular spiking,
fast spiking, intrinsically bursting, chattering, low-threshold spiking,
and the rebound-spiking thalamo-cortical cell.  Each is run as a single
isolated neuron from the demonstration rest state (v = -70 mV, u = b*v)
under a piecewise-constant current protocol, and classified from its spike
train alone.

On the fixed backend the stimulus enters through the dendrite-accumulator
port with the synaptic decay disabled, so the neuron sees exactly the
programmed current each step (all protocol currents are representable on
the accumulator grid).  The 16-bit bias-current field saturates at 8, so
it cannot carry the demonstration current of 10.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import SpikeTrain, cv_isi
from .fxp import DA_FMT, ISYN_FMT, V_FMT, Fixed, encode
from .neuron import (
    DT_MS,
    FixedBatch,
    NeuronParams,
    initial_state,
    step_fixed,
    step_float,
    unpack,
)

REST_V = -70.0
DEMO_CURRENT = 10.0
LTS_PROBE_CURRENT = 2.0  # drives LTS but is subthreshold for RS
REBOUND_CURRENT = -10.0
REBOUND_HOLD_MS = 200.0
REBOUND_WATCH_MS = 300.0

REGIME_PARAMS: dict[str, NeuronParams] = {
    "RS": NeuronParams(a=0.02, b=0.2, c=-65, d=8),
    "FS": NeuronParams(a=0.1, b=0.2, c=-65, d=2),
    "IB": NeuronParams(a=0.02, b=0.2, c=-55, d=4),
    "CH": NeuronParams(a=0.02, b=0.2, c=-50, d=2),
    "LTS": NeuronParams(a=0.02, b=0.25, c=-65, d=2),
    "TC": NeuronParams(a=0.02, b=0.25, c=-65, d=0.05),
}

Protocol = tuple[tuple[float, float], ...]  # (duration_ms, current) segments


def constant_current(i: float, duration_ms: float = 1000.0) -> Protocol:
    return ((duration_ms, i),)


def rebound_protocol() -> Protocol:
    return ((REBOUND_HOLD_MS, REBOUND_CURRENT), (REBOUND_WATCH_MS, 0.0))


@dataclass
class SingleRun:
    """Trace of one isolated neuron: per-step membrane voltage and spikes."""

    params: NeuronParams
    backend: str
    protocol: Protocol
    v_mv: np.ndarray
    spike_steps: list[int]

    def train(self) -> SpikeTrain:
        return SpikeTrain.from_steps(self.spike_steps)


def _protocol_currents(protocol: Protocol) -> np.ndarray:
    segments = [np.full(round(ms / DT_MS), i) for ms, i in protocol]
    return np.concatenate(segments)


def run_single(params: NeuronParams, protocol: Protocol, backend: str) -> SingleRun:
    runs = run_batch([params], [protocol], backend)
    return runs[0]


def run_batch(
    params_list: list[NeuronParams],
    protocols: list[Protocol],
    backend: str,
) -> list[SingleRun]:
    """Run several isolated neurons side by side (padded to a common length)."""
    currents = [_protocol_currents(p) for p in protocols]
    steps = max(len(c) for c in currents)
    drive = np.zeros((steps, len(currents)))
    for j, c in enumerate(currents):
        drive[: len(c), j] = c

    if backend == "fixed":
        v_trace, spike_lists = _run_fixed(params_list, drive)
    elif backend == "float":
        v_trace, spike_lists = _run_float(params_list, drive)
    else:
        raise ValueError(f"unknown backend {backend!r}")

    return [
        SingleRun(
            params=params_list[j],
            backend=backend,
            protocol=protocols[j],
            v_mv=v_trace[: len(currents[j]), j],
            spike_steps=[s for s in spike_lists[j] if s < len(currents[j])],
        )
        for j in range(len(params_list))
    ]


def timing_comparison(
    duration_ms: float = 1000.0,
) -> dict[str, tuple[SpikeTrain, SpikeTrain]]:
    """(float reference, fixed) spike trains for the RS and FS timing runs."""
    names = ("RS", "FS")
    params = [REGIME_PARAMS[n] for n in names]
    protocols = [constant_current(DEMO_CURRENT, duration_ms)] * len(names)
    reference = run_batch(params, protocols, "float")
    test = run_batch(params, protocols, "fixed")
    return {
        name: (reference[j].train(), test[j].train())
        for j, name in enumerate(names)
    }


def _run_fixed(params_list, drive):
    v_scale = float(V_FMT.scale)
    v_trace = np.empty(drive.shape)
    spike_lists: list[list[int]] = []
    alpha_off = Fixed(0, ISYN_FMT)
    for j, p in enumerate(params_list):
        # the stimulus enters through the accumulator port with decay off
        da = [Fixed(encode(i, DA_FMT).raw, DA_FMT) for i in drive[:, j]]
        words = FixedBatch.from_params(p, 1, v0=REST_V).words(0)
        v_peak = encode(p.v_peak, V_FMT)
        spikes = []
        for t, da_t in enumerate(da):
            words, spiked = step_fixed(words, da_t, alpha_off, v_peak=v_peak)
            v_trace[t, j] = unpack(words).v / v_scale
            if spiked:
                spikes.append(t)
        spike_lists.append(spikes)
    return v_trace, spike_lists


def _run_float(params_list, drive):
    v_trace = np.empty(drive.shape)
    spike_lists: list[list[int]] = []
    for j, p in enumerate(params_list):
        state = initial_state(p, v0=REST_V)
        currents = drive[:, j]
        spikes = []
        for t in range(len(currents)):
            state, spiked = step_float(p, state, currents[t], DT_MS)
            v_trace[t, j] = state.v
            if spiked:
                spikes.append(t)
        spike_lists.append(spikes)
    return v_trace, spike_lists


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegimeCheck:
    regime: str
    backend: str
    passed: bool
    detail: str


def classify_tonic(train: SpikeTrain, after_ms: float = 200.0) -> tuple[bool, str]:
    cv = cv_isi(train, after_ms)
    return cv < 0.1, f"CV of ISI after {after_ms:.0f} ms = {cv:.4f}"


def classify_bursting(train: SpikeTrain) -> tuple[bool, str]:
    gaps = train.intervals()
    intra = sum(1 for g in gaps if g < 10.0)
    inter = sum(1 for g in gaps if g > 20.0)
    ok = intra >= 2 and inter >= 1
    return ok, f"{intra} intra-burst ISIs (<10 ms), {inter} inter-burst ISIs (>20 ms)"


def run_demonstrations(backend: str, duration_ms: float = 1000.0) -> dict[str, SingleRun]:
    """All demonstration runs needed to classify the six regimes."""
    plan = [
        ("RS", REGIME_PARAMS["RS"], constant_current(DEMO_CURRENT, duration_ms)),
        ("FS", REGIME_PARAMS["FS"], constant_current(DEMO_CURRENT, duration_ms)),
        ("IB", REGIME_PARAMS["IB"], constant_current(DEMO_CURRENT, duration_ms)),
        ("CH", REGIME_PARAMS["CH"], constant_current(DEMO_CURRENT, duration_ms)),
        ("LTS", REGIME_PARAMS["LTS"], constant_current(LTS_PROBE_CURRENT, duration_ms)),
        ("RS-probe", REGIME_PARAMS["RS"], constant_current(LTS_PROBE_CURRENT, duration_ms)),
        ("REBOUND", REGIME_PARAMS["TC"], rebound_protocol()),
    ]
    runs = run_batch([p for _, p, _ in plan], [proto for _, _, proto in plan], backend)
    return {name: run for (name, _, _), run in zip(plan, runs)}


def evaluate_regimes(backend: str, duration_ms: float = 1000.0) -> list[RegimeCheck]:
    """Run every demonstration and classify it; one check per regime."""
    return classify_runs(run_demonstrations(backend, duration_ms), backend)


def classify_runs(by_name: dict[str, SingleRun], backend: str) -> list[RegimeCheck]:
    checks = []
    ok, detail = classify_tonic(by_name["RS"].train())
    checks.append(RegimeCheck("RS", backend, ok, f"tonic regular spiking: {detail}"))

    rs_count = len(by_name["RS"].spike_steps)
    fs_count = len(by_name["FS"].spike_steps)
    checks.append(
        RegimeCheck(
            "FS", backend, fs_count > 2 * rs_count,
            f"fast spiking: {fs_count} spikes vs {rs_count} for RS at equal input",
        )
    )

    for name in ("IB", "CH"):
        ok, detail = classify_bursting(by_name[name].train())
        checks.append(RegimeCheck(name, backend, ok, f"bursting: {detail}"))

    lts_spikes = len(by_name["LTS"].spike_steps)
    rs_probe_spikes = len(by_name["RS-probe"].spike_steps)
    checks.append(
        RegimeCheck(
            "LTS", backend, lts_spikes >= 1 and rs_probe_spikes == 0,
            f"low threshold: {lts_spikes} spikes at I={LTS_PROBE_CURRENT} "
            f"where RS fires {rs_probe_spikes}",
        )
    )

    rebound = by_name["REBOUND"]
    hold_steps = round(REBOUND_HOLD_MS / DT_MS)
    during = [s for s in rebound.spike_steps if s < hold_steps]
    release_window = round(100.0 / DT_MS)
    after = [s for s in rebound.spike_steps if hold_steps <= s < hold_steps + release_window]
    checks.append(
        RegimeCheck(
            "REBOUND", backend, not during and len(after) >= 1,
            f"rebound: {len(during)} spikes during hyperpolarisation, "
            f"{len(after)} within 100 ms of release",
        )
    )
    return checks
