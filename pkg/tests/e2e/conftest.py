"""
E2E test configuration and fixtures
"""

import pytest

from app.cli import main


@pytest.fixture(scope="session")
def simulated_files(tmp_path_factory):
    """Panel artifact and wide CSV written by the simulate command"""
    out_dir = tmp_path_factory.mktemp("simulated")
    panel_path = out_dir / "panel.json"
    csv_path = out_dir / "panel.csv"
    code = main([
        "simulate", "--n", "5", "--T", "420", "--k", "2", "--rho", "0.3",
        "--gamma", "0.2", "--phi0", "-6", "--seed", "5",
        "--out", str(panel_path), "--csv", str(csv_path),
    ])
    assert code == 0
    return panel_path, csv_path


@pytest.fixture
def panel_path(simulated_files):
    return simulated_files[0]


@pytest.fixture
def panel_csv(simulated_files):
    return simulated_files[1]
