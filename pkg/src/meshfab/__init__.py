"""meshfab: mesh-to-fabrication toolkit.

Canonical-pose computation, 1:1 tiled orthographic fabrication templates,
geodesic length measurement on mesh surfaces, scan-to-design registration
with drift reports, pin-jointed truss verification, base-stability checks
and crate packing — with a CLI and a small read-only HTTP service for the
browser viewer.
"""

__version__ = "0.1.0"
