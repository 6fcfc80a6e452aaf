"""Machine-readable report assembly.

Reports are plain dicts with a fixed field order, serialized with the
stock JSON encoder so that equal inputs give byte-identical files.  No
timestamps or host details: everything in a report is derivable from the
seeds and configs it embeds.  Non-finite ratios are serialized as null.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from . import __version__
from .outcome import OutcomeAssessmentResult, OutcomeStandard
from .rollouts import DistSummary, RewardSamples
from .solverq import DELTA_MU_CONVENTION, SolverQualityConfig, SolverQualityResult

REPORT_SCHEMA_VERSION = 1


def provenance(base_seed: int, configs: dict) -> dict:
    return {
        "tool_version": __version__,
        "base_seed": base_seed,
        "configs": configs,
    }


def dist_summary_dict(ds: DistSummary) -> dict:
    return {
        "mean": ds.mean,
        "std": ds.std,
        "stderr": ds.stderr,
        "min": ds.min,
        "max": ds.max,
        "n": ds.n,
        "bin_edges": list(ds.bin_edges),
        "counts": list(ds.counts),
        "flags": list(ds.flags),
    }


def outcome_dict(std: OutcomeStandard, res: OutcomeAssessmentResult) -> dict:
    return {
        "z_star": std.z_star,
        "alpha": std.alpha,
        "k": std.k,
        "upm": res.upm,
        "lpm": res.lpm,
        "ratio": res.ratio if math.isfinite(res.ratio) else None,
        "x_o": res.x_o,
        "n": res.n,
        "flags": list(res.flags),
    }


def solverq_dict(res: SolverQualityResult, config: SolverQualityConfig) -> dict:
    return {
        "mu_c": res.candidate.mu,
        "sigma_c": res.candidate.sigma,
        "mu_t": res.trusted.mu,
        "sigma_t": res.trusted.sigma,
        "r_low": config.r_low,
        "r_high": config.r_high,
        "kappa": config.kappa,
        "squash_gain": config.squash_gain,
        "h2": res.h2,
        "delta_mu": res.delta_mu,
        "delta_mu_convention": DELTA_MU_CONVENTION,
        "f": res.f,
        "m_s": res.m_s,
        "x_s": res.x_s,
        "flags": list(res.flags),
    }


def samples_note(samples: RewardSamples) -> dict:
    kinds = {}
    for k in samples.terminals:
        kinds[k] = kinds.get(k, 0) + 1
    return {
        "n": samples.run_count,
        "base_seed": samples.base_seed,
        "terminals": dict(sorted(kinds.items())),
        "timeouts_included": True,
    }


def dumps_report(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_report(doc: dict, path) -> None:
    Path(path).write_text(dumps_report(doc))


def write_csv(path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)
