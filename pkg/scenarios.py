"""
Builtin simulation scenarios and scenario files.
Provides the step-signal-plus-dependent-noise settings of the benchmark study.
"""

import json
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from errors import DepSmuceError, UnknownScenarioError
from experiments import DEFAULT_MC_SEED, DetectorVariant, Scenario
from noise import NoiseModel, Seed
from step_signal import StepSignal

N = 1000
BREAKS = (101, 301, 501, 551, 751)
ALPHAS = (0.1, 0.5, 0.9)

# Detector pair compared in every builtin scenario
VARIANTS = (
    DetectorVariant("SMUCE", lrv="iid-diff"),
    DetectorVariant("DepSMUCE", lrv="block", block_length=10),
)


REFERENCE_METRICS = ("p_correct", "mean_abs_kdiff", "mse", "mae")


def _reference(smuce: tuple, dep: tuple) -> Dict[str, Dict[str, float]]:
    """Published summary rows per cell, ordered like ALPHAS.

    Each row is (P(K = K*), mean |K - K*|, MSE, MAE).
    """
    table = {}
    for variant, rows in (("SMUCE", smuce), ("DepSMUCE", dep)):
        for alpha, row in zip(ALPHAS, rows):
            table[f"{variant}({alpha:g})"] = dict(zip(REFERENCE_METRICS, row))
    return table


# Predefined scenarios
SCENARIOS = [
    # MA(1), weak dependence
    Scenario(
        name="ma1_01",
        description="MA(1) errors with kappa=0.1, levels (0,1,0,2,0,-1)",
        n=N,
        truth=StepSignal(BREAKS, (0, 1, 0, 2, 0, -1), N),
        noise=NoiseModel(1.0, ma=(0.1,)),
        alphas=ALPHAS,
        variants=VARIANTS,
        reference=_reference(
            ((0.980, 0.020, 0.018, 0.060), (0.760, 0.271, 0.019, 0.064),
             (0.238, 1.407, 0.024, 0.077)),
            ((0.883, 0.117, 0.025, 0.072), (0.988, 0.012, 0.018, 0.060),
             (0.946, 0.056, 0.018, 0.060)),
        ),
    ),
    # MA(1), moderate dependence
    Scenario(
        name="ma1_03",
        description="MA(1) errors with kappa=0.3, levels (0,1,0,2,0,-1)",
        n=N,
        truth=StepSignal(BREAKS, (0, 1, 0, 2, 0, -1), N),
        noise=NoiseModel(1.0, ma=(0.3,)),
        alphas=ALPHAS,
        variants=VARIANTS,
        reference=_reference(
            ((0.619, 0.475, 0.033, 0.093), (0.069, 2.569, 0.045, 0.118),
             (0.000, 6.488, 0.063, 0.145)),
            ((0.600, 0.446, 0.064, 0.139), (0.947, 0.053, 0.031, 0.088),
             (0.919, 0.084, 0.030, 0.085)),
        ),
    ),
    # MA(4), strong dependence
    Scenario(
        name="ma4",
        description="MA(4) errors with coefficients (0.9,0.8,0.7,0.6), levels (0,3,0,4,0,-3)",
        n=N,
        truth=StepSignal(BREAKS, (0, 3, 0, 4, 0, -3), N),
        noise=NoiseModel(1.0, ma=(0.9, 0.8, 0.7, 0.6)),
        alphas=ALPHAS,
        variants=VARIANTS,
        reference=_reference(
            ((0.0, 43.845, 1.787, 1.016), (0.0, 56.842, 2.041, 1.108),
             (0.0, 67.865, 2.208, 1.166)),
            ((0.330, 0.848, 0.861, 0.584), (0.806, 0.200, 0.418, 0.364),
             (0.856, 0.150, 0.319, 0.322)),
        ),
    ),
    # ARMA(2,6)
    Scenario(
        name="arma26",
        description="ARMA(2,6) errors, AR (0.75,-0.5), levels (0,5,1,8,1,-2)",
        n=N,
        truth=StepSignal(BREAKS, (0, 5, 1, 8, 1, -2), N),
        noise=NoiseModel(1.0, ar=(0.75, -0.5), ma=(0.8, 0.7, 0.6, 0.5, 0.4, 0.3)),
        alphas=ALPHAS,
        variants=VARIANTS,
        reference=_reference(
            ((0.0, 59.950, 4.174, 1.592), (0.0, 73.800, 4.550, 1.684),
             (0.0, 85.582, 4.798, 1.743)),
            ((0.547, 0.516, 1.534, 0.778), (0.937, 0.064, 0.646, 0.465),
             (0.892, 0.115, 0.586, 0.449)),
        ),
    ),
]


def builtin_scenarios() -> List[Scenario]:
    """All builtin scenarios."""
    return list(SCENARIOS)


def get_scenario_by_name(name: str) -> Scenario:
    """Get a builtin scenario by name."""
    for scenario in SCENARIOS:
        if scenario.name.lower() == name.lower():
            return scenario
    raise UnknownScenarioError(
        f"Scenario not found: {name} (known: {', '.join(s.name for s in SCENARIOS)})"
    )


def scenario_from_dict(data: Dict[str, Any]) -> Scenario:
    """Build a scenario from its JSON form."""
    try:
        n = int(data["n"])
        return Scenario(
            name=str(data["name"]),
            description=str(data.get("description", "")),
            n=n,
            truth=StepSignal.from_arrays(data["breaks"], data["levels"], n),
            noise=NoiseModel.from_dict(data.get("noise", {})),
            alphas=tuple(data.get("alphas", ALPHAS)),
            variants=tuple(
                DetectorVariant(
                    name=v["name"],
                    lrv=v.get("lrv", "block"),
                    block_length=v.get("block_length"),
                    min_len=v.get("min_len"),
                )
                for v in data.get("variants", [v.to_dict() for v in VARIANTS])
            ),
            reps=int(data.get("reps", 250)),
            seed=Seed(int(data.get("seed", 0))),
            mc_reps=int(data.get("mc_reps", 10000)),
            mc_seed=Seed(int(data.get("mc_seed", DEFAULT_MC_SEED))),
        )
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, DepSmuceError):
            raise
        raise UnknownScenarioError(f"invalid scenario definition: {e!r}") from e


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    return {
        "name": scenario.name,
        "description": scenario.description,
        "n": scenario.n,
        "breaks": list(scenario.truth.breaks),
        "levels": list(scenario.truth.levels),
        "noise": scenario.noise.to_dict(),
        "alphas": list(scenario.alphas),
        "variants": [v.to_dict() for v in scenario.variants],
        "reps": scenario.reps,
        "seed": scenario.seed.base,
        "mc_reps": scenario.mc_reps,
        "mc_seed": scenario.mc_seed.base,
    }


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Read a scenario JSON file."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise UnknownScenarioError(f"cannot read scenario file {path}: {e}") from e
    if not isinstance(data, dict):
        raise UnknownScenarioError(f"scenario file {path} must hold a JSON object")
    return scenario_from_dict(data)


def dump_scenario(scenario: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(
        json.dumps(scenario_to_dict(scenario), indent=2), encoding="utf-8"
    )


def is_scenario_file(name_or_path: str) -> bool:
    """True when the argument names a JSON scenario file rather than a builtin."""
    path = Path(name_or_path)
    return path.suffix == ".json" or path.is_file()


def resolve_scenario(
    name_or_path: str,
    reps: Optional[int] = None,
    seed: Optional[int] = None,
    mc_reps: Optional[int] = None,
    burn_in: Optional[int] = None,
    mc_seed: Optional[int] = None,
) -> Scenario:
    """Builtin name or JSON file, with optional overrides."""
    if is_scenario_file(name_or_path):
        scenario = load_scenario(name_or_path)
    else:
        scenario = get_scenario_by_name(name_or_path)

    overrides: Dict[str, Any] = {}
    if reps is not None:
        overrides["reps"] = reps
    if seed is not None:
        overrides["seed"] = Seed(seed)
    if mc_reps is not None:
        overrides["mc_reps"] = mc_reps
    if burn_in is not None:
        overrides["burn_in"] = burn_in
    if mc_seed is not None:
        overrides["mc_seed"] = Seed(mc_seed)
    return replace(scenario, **overrides) if overrides else scenario


def format_scenarios_list() -> str:
    """Format all scenarios as a readable list."""
    lines = ["Available scenarios:"]
    for scenario in SCENARIOS:
        lines.append(f"  {scenario.name:<8} {scenario.description}")
    return "\n".join(lines)
