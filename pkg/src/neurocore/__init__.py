"""Emulator of a microcode-programmable neurocore running fixed-point
Izhikevich neurons, with a basal ganglia Go/No-Go network on top."""

from .analysis import SpikeTrain, errt, export_raster, firing_rate, load_raster_csv
from .bg import BgConfig, build_bg, run_gonogo, set_dopamine
from .fxp import Fixed, FixedFormat, decode, encode, mul_rescale, sat_add, shr
from .network import (
    ConfigError,
    ConnectionSpec,
    Network,
    PopulationSpec,
    SpikeRecord,
    build_connections,
)
from .neuron import (
    CompartmentWords,
    NeuronParams,
    NeuronState,
    pack,
    step_fixed,
    step_float,
    unpack,
)
from .schedule import BlockSchedule, izhikevich_schedule, validate_schedule
from .synapse import PoissonSource, accumulate, isyn_step, modulated_current

__version__ = "0.1.0"

__all__ = [
    "BgConfig",
    "BlockSchedule",
    "CompartmentWords",
    "ConfigError",
    "ConnectionSpec",
    "Fixed",
    "FixedFormat",
    "Network",
    "NeuronParams",
    "NeuronState",
    "PoissonSource",
    "PopulationSpec",
    "SpikeRecord",
    "SpikeTrain",
    "accumulate",
    "build_bg",
    "build_connections",
    "decode",
    "encode",
    "errt",
    "export_raster",
    "firing_rate",
    "isyn_step",
    "load_raster_csv",
    "izhikevich_schedule",
    "modulated_current",
    "mul_rescale",
    "pack",
    "run_gonogo",
    "sat_add",
    "set_dopamine",
    "shr",
    "step_fixed",
    "step_float",
    "unpack",
    "validate_schedule",
]
