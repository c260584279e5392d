"""Shortest paths from spike arrival times.

Synaptic delays equal edge weights, so the first spike reaching a node
arrives after exactly its distance from the source.
"""
from spikeopt.wavefront import WeightedGraph, parse_grid, plan_path, shortest_paths

g = WeightedGraph(5, ((0, 1, 4), (0, 2, 1), (2, 1, 2), (1, 3, 1), (2, 3, 5)))
print("firing times from node 0:", shortest_paths(g, 0).to_list())

maze = """\
S...#.....
.##.#.###.
.#..#...#.
.#.####.#.
........#G
"""
world = parse_grid(maze)
path = plan_path(world)
rows = [list(r) for r in maze.splitlines()]
for r, c in path[1:-1]:
    rows[r][c] = "*"
print(f"path of {len(path) - 1} moves:")
print("\n".join("".join(r) for r in rows))
