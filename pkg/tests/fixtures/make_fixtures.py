"""Regenerate the planted fixtures and their oracle metadata.

Run from the repository root: ``python tests/fixtures/make_fixtures.py``.
"""

from pathlib import Path

from coverclust.oracle import planted_pointsets, planted_trajectories, write_fixture

HERE = Path(__file__).parent
JITTER = 0.1
A = [[0.0, 0.0], [1.0, 0.0]]
B = [[100.0, 0.0], [101.0, 0.0]]
C = [[0.0, 100.0], [1.0, 100.0]]

FIXTURES = {
    "traj_2cluster.ndjson": lambda: planted_trajectories([A, B], 15, JITTER, repeat=2, seed=11),
    "traj_3cluster.ndjson": lambda: planted_trajectories([A, B, C], 15, JITTER, repeat=2, seed=12),
    "pset_2cluster.ndjson": lambda: planted_pointsets([A, B], 15, JITTER, repeat=2, seed=13),
    "pset_3cluster.ndjson": lambda: planted_pointsets([A, B, C], 15, JITTER, repeat=2, seed=14),
}


def main():
    for name, make in FIXTURES.items():
        meta = write_fixture(make(), HERE / name, l=2)
        print(f"{name}: planted {meta['ground_truth_cost']:.6f}, grid {meta['grid_oracle_cost']:.6f} "
              f"+ slack {meta['grid_oracle_slack']:.6f}")


if __name__ == "__main__":
    main()
