"""Shared pytest config: prints one PASS/FAIL line per acceptance criterion."""
from __future__ import annotations

CRITERIA = {
    "test_resemblance_table_exactness": "resemblance table exactness",
    "test_adherence_monotonicity_end_to_end": "adherence monotonicity end-to-end",
    "test_rasterizer_oracle_equivalence": "rasterizer oracle equivalence",
    "test_mask_pipeline": "mask pipeline",
    "test_timeline_math": "timeline math",
    "test_skeleton_round_trip": "skeleton round-trip",
    "test_walkthrough_determinism": "walkthrough determinism",
    "test_service_contract": "service contract",
    "test_project_persistence": "project persistence",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in getattr(report, "nodeid", ""):
                continue
            name = report.nodeid.split("::")[-1]
            label = CRITERIA.get(name)
            if label:
                verdict = "PASS" if outcome == "passed" else "FAIL"
                lines.append(f"ACCEPTANCE {label}: {verdict}")
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
