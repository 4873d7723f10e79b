import pytest

from xfem2d import CircleLevelSet, EnrichmentKind, SpaceMode, build_space, disk_mesh

#: (criterion, passed, detail) rows recorded by the acceptance suite.
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")


@pytest.fixture(scope="session")
def mesh0():
    """Cycle-0 mesh, 80 cells."""
    return disk_mesh(2)


@pytest.fixture(scope="session")
def levelset():
    return CircleLevelSet(0.5)


@pytest.fixture(scope="session")
def spaces(mesh0, levelset):
    """One space per enrichment mode on the cycle-0 mesh."""
    return {
        SpaceMode.XFEM_OFF: build_space(mesh0, levelset, EnrichmentKind.ABS, SpaceMode.XFEM_OFF),
        SpaceMode.STRONG: build_space(mesh0, levelset, EnrichmentKind.SIGN, SpaceMode.STRONG),
        SpaceMode.WEAK_NOBLEND: build_space(mesh0, levelset, EnrichmentKind.ABS,
                                            SpaceMode.WEAK_NOBLEND),
        SpaceMode.WEAK_BLEND: build_space(mesh0, levelset, EnrichmentKind.ABS,
                                          SpaceMode.WEAK_BLEND),
    }
