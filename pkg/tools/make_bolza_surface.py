"""Write the bundled Bolza surface description from the in-code construction.

    python tools/make_bolza_surface.py src/hypspec/data/bolza.surface
"""
import sys

from hypspec.fuchsian import bolza_group, dirichlet_diameter, write_surface_spec


def main(path):
    G = bolza_group()
    # cross-check the closed-form diameter against the half-space computation
    d = dirichlet_diameter(G)
    if abs(d - G.domain_diameter) > 1e-9:
        raise SystemExit(f"diameter mismatch: {d} vs {G.domain_diameter}")
    write_surface_spec(G, path)


if __name__ == "__main__":
    main(sys.argv[1])
