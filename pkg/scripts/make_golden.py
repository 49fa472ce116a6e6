"""Record the pinned test fixtures under tests/data/.

Run once; the tests compare against the files this writes. Re-running is
only needed after a deliberate change to a generator, SUT or stats format.
"""
import random
import shutil
import tempfile
from pathlib import Path

from divfuzz import paramfile
from divfuzz.campaign import Campaign, CampaignConfig
from divfuzz.choices import SplitParameterSequence
from divfuzz.generators import generate_expr, generate_xml

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def record(name, generator, seed, min_structural=16):
    # First seed at or after ``seed`` whose input has a non-trivial shape.
    while True:
        inp = generator(SplitParameterSequence(rng=random.Random(seed)))
        if len(inp.source_snapshot.params()[0]) >= min_structural:
            break
        seed += 1
    paramfile.write(DATA / f"{name}.bdvf", *inp.source_snapshot.params())
    (DATA / f"{name}.txt").write_bytes(inp.concrete)
    print(name, inp.text)


def stats(name, **kw):
    with tempfile.TemporaryDirectory() as tmp:
        Campaign(CampaignConfig(out_dir=tmp, **kw)).run()
        shutil.copy(Path(tmp) / "stats.csv", DATA / name)


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    record("xml_s1", generate_xml, 11)
    record("expr_s2", generate_expr, 22)
    stats("campaign_bst_seed3.csv", mode="bediv-structure", sut="bst", generator="tree", seed=3, runs=2000, stats_interval=200)
    stats("compare_a.csv", mode="quickcheck", sut="expr", generator="expr", seed=1, runs=1000, stats_interval=250)
    stats("compare_b.csv", mode="bediv-structure", sut="expr", generator="expr", seed=1, runs=1000, stats_interval=250)
