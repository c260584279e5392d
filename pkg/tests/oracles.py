"""Independent reference solvers used only by the tests."""
import heapq
from collections import deque

import numpy as np


def project_polyhedron(z, a, k, iters=20000, tol=1e-13):
    """Euclidean projection onto {x : a x <= k} by Dykstra's alternating projections."""
    x = np.array(z, dtype=float)
    m = a.shape[0]
    incr = np.zeros((m, x.size))
    norms = (a * a).sum(axis=1)
    for _ in range(iters):
        prev = x.copy()
        for i in range(m):
            y = x + incr[i]
            excess = a[i] @ y - k[i]
            x = y - (excess / norms[i]) * a[i] if excess > 0 else y
            incr[i] = y - x
        if np.linalg.norm(x - prev) < tol:
            break
    return x


def projected_gradient_qp(q, p, a, k, iters=20000, tol=1e-12):
    lq = np.linalg.eigvalsh(q)[-1] if np.any(q) else 0.0
    step = 1.0 / lq if lq > 0 else 0.05
    x = project_polyhedron(np.zeros(p.size), a, k)
    for _ in range(iters):
        x_new = project_polyhedron(x - step * (q @ x + p), a, k)
        if np.linalg.norm(x_new - x) < tol:
            return x_new
        x = x_new
    return x


def dijkstra(n, edges, source):
    adj = [[] for _ in range(n)]
    for u, v, w in edges:
        adj[u].append((v, w))
    dist = [None] * n
    dist[source] = 0
    heap = [(0, source)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adj[u]:
            nd = d + w
            if dist[v] is None or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def bfs_grid(grid, start, goal):
    """Shortest 4-connected path length (in moves) on a list-of-strings grid, or None."""
    h, w = len(grid), len(grid[0])
    seen = {start: 0}
    dq = deque([start])
    while dq:
        r, c = dq.popleft()
        if (r, c) == goal:
            return seen[(r, c)]
        for dr, dc in ((-1, 0), (0, 1), (1, 0), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < h and 0 <= cc < w and grid[rr][cc] != "#" and (rr, cc) not in seen:
                seen[(rr, cc)] = seen[(r, c)] + 1
                dq.append((rr, cc))
    return None


def is_k_colorable(n, edges, k):
    adj = [set() for _ in range(n)]
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    order = sorted(range(n), key=lambda v: -len(adj[v]))
    col = {}

    def bt(i):
        if i == n:
            return True
        v = order[i]
        for c in range(k):
            if all(col.get(u) != c for u in adj[v]):
                col[v] = c
                if bt(i + 1):
                    return True
                del col[v]
        return False

    return bt(0)
