"""
Codes - color-code construction, CSS audits and the lattice-surgery merged code
"""

from codes.color_code import (
    ColorCode,
    CssReport,
    Plaquette,
    StabilizerCode,
    build_hex_color_code,
    min_logical_weight,
    transversal_s_image,
    verify_css,
)
from codes.export import export_alist, parse_alist
from codes.merged_code import MergedCode, merge_codes

__all__ = [
    "ColorCode",
    "CssReport",
    "MergedCode",
    "Plaquette",
    "StabilizerCode",
    "build_hex_color_code",
    "export_alist",
    "merge_codes",
    "min_logical_weight",
    "parse_alist",
    "transversal_s_image",
    "verify_css",
]
