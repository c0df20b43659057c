__all__ = [
    "IngestMetadata", "IngestResult", "ingest",
    "COLUMNS", "PanelSidecar", "CategorySidecar", "sidecar_path", "read_sidecar", "panel_to_frame", "export_panel",
    "write_json", "read_json", "package_versions", "build_manifest", "write_manifest", "manifest_path", "MANIFEST_NAME",
]

from .ingest import IngestMetadata, IngestResult, ingest
from .panelfile import COLUMNS, PanelSidecar, CategorySidecar, sidecar_path, read_sidecar, panel_to_frame, export_panel
from .manifest import write_json, read_json, package_versions, build_manifest, write_manifest, manifest_path, MANIFEST_NAME
