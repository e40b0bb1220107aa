import math

import pytest

from fp_qsdc.clickstats import ClickModel, interval_stats
from fp_qsdc.params import SourceParams, SystemParams, derive_channel
from fp_qsdc.source import make_interval
from fp_qsdc.states import CLASS_ORDER


@pytest.fixture(scope="session")
def system():
    return SystemParams()


@pytest.fixture(scope="session")
def paper_source_2db():
    """Source at the 2 dB optimal operating point."""
    return SourceParams(intensity_max=0.0895, delta_x=0.0490 * math.pi,
                        delta_z=0.0546 * math.pi)


@pytest.fixture(scope="session")
def model_ba_2db(system):
    ba, _ = derive_channel(system, 2.0)
    return ClickModel.for_round(system, ba)


@pytest.fixture(scope="session")
def stats_z_2db(system, paper_source_2db, model_ba_2db):
    """First-round basis-union stats per intensity class, Z basis, 2 dB."""
    return {
        c: interval_stats(make_interval(paper_source_2db, "Z", None, c),
                          paper_source_2db, model_ba_2db, system.n_cut)
        for c in CLASS_ORDER
    }
