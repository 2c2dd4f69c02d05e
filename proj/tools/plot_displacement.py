# Copyright 2026 The circlenet Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Plot a displacement table (circlenet displace / acceptance --table)."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("table", help="TSV with columns displacement, box_iou, ciou")
    parser.add_argument("output", help="image file to write")
    args = parser.parse_args()

    rows = np.loadtxt(args.table, comments="#", ndmin=2)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(rows[:, 0], rows[:, 1], label="box IoU")
    ax.plot(rows[:, 0], rows[:, 2], label="circle IoU")
    ax.set_xlabel("displacement (pixels)")
    ax.set_ylabel("mean overlap")
    ax.set_ylim(0, 1.02)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
