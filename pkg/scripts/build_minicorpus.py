#!/usr/bin/env python3
"""Regenerate the bundled demo corpus under src/speechmine/data/minicorpus."""

import shutil
from pathlib import Path

from speechmine.synthetic import write_corpus

DEMO_CFG = """\
# Demo configuration for the bundled mini-corpus; paths are relative to this file.
# Frequency floors and training settings differ from the defaults (50 / 100, lr 0.1, 20 epochs)
# because the corpus has only 20 screenplays.

[paths]
screenplay_dir = screenplays
subtitle_dir = subtitles
genres = genres.tsv
durations = durations.tsv
output_dir = run

[verbs]
min_count = 20
stop_top_k = 10

[split]
train_count = 15
seed = 0

[train]
learning_rate = 0.5
epochs = 40
batch_size = 32
seed = 0
vocab_min_count = 2

[calibration]
ap_cutoff = 0.01
precision_floor = 0.3

[mining]
clip_length = 10.0
per_class_cap = 40000
seed = 0
"""


def main():
    out = Path(__file__).resolve().parents[1] / "src" / "speechmine" / "data" / "minicorpus"
    if out.exists():
        shutil.rmtree(out)
    write_corpus(out)
    (out / "demo.cfg").write_text(DEMO_CFG, encoding="utf-8")
    print(out)


if __name__ == "__main__":
    main()
