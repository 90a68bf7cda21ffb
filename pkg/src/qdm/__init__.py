"""Exact quantum D-modules of toric superspaces."""
from .io import fixture_path, load_input, parse_input
from .pipeline import Artifacts, VerifyReport, run_pipeline, verify_suite

__all__ = ["Artifacts", "VerifyReport", "fixture_path", "load_input", "parse_input",
           "run_pipeline", "verify_suite"]
