"""Artifact writers: catalog, reports, trajectories and the design manifest."""

from .manifest import (
    ManifestError,
    build_manifest,
    make_provenance,
    manifest_from_best_point,
    manifest_schema,
    read_manifest,
    write_manifest,
    write_manifest_schema,
)
from .output_formats import ArtifactWriter, best_point_payload, read_json

__all__ = [
    "ArtifactWriter",
    "ManifestError",
    "best_point_payload",
    "build_manifest",
    "make_provenance",
    "manifest_from_best_point",
    "manifest_schema",
    "read_json",
    "read_manifest",
    "write_manifest",
    "write_manifest_schema",
]
