"""Writes every connected graph with 2..7 vertices from the networkx atlas.

Output: one JSON object per line, {"vertices": [...], "edges": [[u, v], ...]},
with identifiers 1..n.
"""
import json
import sys

import networkx as nx
from networkx.generators.atlas import graph_atlas_g


def main(out_path):
    count = 0
    with open(out_path, "w") as out:
        for g in graph_atlas_g():
            n = g.number_of_nodes()
            if n < 2 or n > 7 or not nx.is_connected(g):
                continue
            edges = sorted((min(u, v) + 1, max(u, v) + 1) for u, v in g.edges())
            out.write(json.dumps({"vertices": list(range(1, n + 1)), "edges": edges}) + "\n")
            count += 1
    print(f"wrote {count} graphs to {out_path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/graphs_upto7.jsonl")
