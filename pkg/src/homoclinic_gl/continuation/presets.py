"""Named parameter sets for the standard bifurcation diagrams."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..model import ParamId, SystemParams
from .branch import (
    Branch,
    ContinuationConfig,
    continue_both_ways,
    continue_branch,
    detect_special_points,
    initial_mesh,
    solve_homoclinic,
    switch_branch,
)

__all__ = ["DiagramPreset", "PresetResult", "PRESETS", "run_preset"]


@dataclass(frozen=True)
class DiagramPreset:
    name: str
    params: SystemParams
    control: str
    config: ContinuationConfig
    both_ways: bool  # start at x_h and follow both orientations of the tangent
    switch: bool = False  # leave the symmetric branch at each pitchfork
    description: str = ""


@dataclass
class PresetResult:
    preset: DiagramPreset
    branch: Branch
    switches: list = field(default_factory=list)  # (SpecialPoint, SwitchResult | error string)
    orbit_sign: int = 1


PRESETS = {
    "fig7a": DiagramPreset(
        "fig7a",
        SystemParams(s=2.0, beta1=1.7071068, beta2=1.0, beta4=2.0),
        "beta3",
        ContinuationConfig(ds=0.05, ds_max=0.2, max_points=40, lam_min=-1.0, lam_max=1.0),
        True,
        description="beta3 control, beta1 at the ell=0 resonance",
    ),
    "fig7b": DiagramPreset(
        "fig7b",
        SystemParams(s=2.0, beta1=7.5355339, beta2=1.0, beta4=2.0),
        "beta3",
        ContinuationConfig(ds=0.02, ds_max=0.1, max_points=60, lam_min=-1.0, lam_max=1.0),
        True,
        description="beta3 control, beta1 at the ell=2 resonance",
    ),
    "fig7c": DiagramPreset(
        "fig7c",
        SystemParams(s=2.0, beta1=17.36396103, beta2=10.0, beta4=20.0),
        "beta3",
        ContinuationConfig(ds=0.01, ds_max=0.05, max_points=80, lam_min=-0.5, lam_max=0.5),
        True,
        description="beta3 control, beta1 at the ell=4 resonance",
    ),
    "fig9": DiagramPreset(
        "fig9",
        SystemParams(s=2.0, beta1=0.5, beta2=1.0),
        "beta1",
        ContinuationConfig(ds=0.1, ds_max=0.5, max_points=200, lam_min=0.4, lam_max=20.0),
        False,
        switch=True,
        description="beta1 control on the x2 = 0 branch with branch switching",
    ),
}


def run_preset(
    name: str,
    overrides: dict | None = None,
    orbit_sign: int = 1,
    control: str | None = None,
    config: ContinuationConfig | None = None,
    both_ways: bool | None = None,
    switch: bool | None = None,
) -> PresetResult:
    """Run a named diagram; ``"custom"`` starts from default parameters and
    requires ``control``. ``overrides`` replace individual parameters."""
    if name == "custom":
        if control is None:
            raise ValueError("the custom diagram needs a control parameter")
        base = DiagramPreset("custom", SystemParams(), control, config or ContinuationConfig(), True)
    elif name in PRESETS:
        base = PRESETS[name]
    else:
        raise KeyError(f"unknown diagram {name!r}; choose from {sorted(PRESETS) + ['custom']}")
    params = base.params.replace(**(overrides or {}))
    ctrl = ParamId.parse(control or base.control).value
    cfg = config or base.config
    bw = base.both_ways if both_ways is None else both_ways
    sw = base.switch if switch is None else switch
    preset = DiagramPreset(base.name, params, ctrl, cfg, bw, sw, base.description)
    start = solve_homoclinic(initial_mesh(sign=orbit_sign), params)
    if bw:
        branch = continue_both_ways(start, ctrl, cfg)
    else:
        branch = continue_branch(start, ctrl, cfg)
    detect_special_points(branch)
    result = PresetResult(preset, branch, [], orbit_sign)
    if sw:
        for sp in branch.specials:
            if sp.kind != "pitchfork":
                continue
            try:
                result.switches.append((sp, switch_branch(branch, sp)))
            except Exception as exc:  # report and continue with the other pitchforks
                result.switches.append((sp, f"{type(exc).__name__}: {exc}"))
    return result


