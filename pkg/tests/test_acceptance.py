"""Acceptance suite at the default (full) configuration.

Prints one [PASS]/[FAIL] line per criterion, then asserts each one.
Set BLAYER_QUICK=1 for the reduced k <= 512 profile.
"""

import os

import pytest

from blayer.config import RunConfig
from blayer.verify import CHECKS, Pipeline, run_checks

IDS = [i for i, _, _ in CHECKS] + [13]


@pytest.fixture(scope="module")
def results(request):
    cfg = RunConfig()
    if os.environ.get("BLAYER_QUICK"):
        cfg = cfg.quick_profile()
    term = request.config.pluginmanager.getplugin("terminalreporter")
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def report(r):
        # bypass output capture so the line lands in the terminal log
        with capman.global_and_fixture_disabled():
            term.write_line("")
            term.write_line(r.line())

    res = run_checks(Pipeline(cfg), report=report)
    return {r.id: r for r in res}


@pytest.mark.parametrize("cid", IDS)
def test_criterion(results, cid):
    r = results[cid]
    assert r.passed, r.line()
