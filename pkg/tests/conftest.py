import pytest

from lexdisc.synth import FixtureSpec, make_fixture

# filled by test_acceptance; printed at the end of the session
ACCEPTANCE = []


@pytest.fixture(scope="session")
def exp1_manifest(tmp_path_factory):
    """ADS tokens plus extra per-token jitter in IDS, 10 speakers x 20 shared types."""
    return make_fixture(tmp_path_factory.mktemp("exp1"), FixtureSpec())


@pytest.fixture(scope="session")
def control_manifest(tmp_path_factory):
    """RS is the low-jitter ("read-like") register, ADS carries the extra jitter."""
    spec = FixtureSpec(registers=("ADS", "RS"), extra_jitter={"ADS": 0.15, "RS": 0.0}, seed=1)
    return make_fixture(tmp_path_factory.mktemp("control"), spec)


@pytest.fixture(scope="session")
def lexicon_spec():
    # IDS: 30 core types + 13 flagged reduplications (30% of 43 types)
    return FixtureSpec(n_shared=20, n_x_only=10, n_y_only=10, n_onomatopoeia=13, seed=2)


@pytest.fixture(scope="session")
def lexicon_manifest(tmp_path_factory, lexicon_spec):
    return make_fixture(tmp_path_factory.mktemp("lexicon"), lexicon_spec)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {name}: {detail}")
