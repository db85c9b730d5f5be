"""Rotation-, scale- and translation-invariant palm ROI extraction."""

from .contour import ContourChain, trace_boundary
from .errors import PalmRoiError
from .features import LineFeatureMap, extract_line_features, line_response, smooth, thin, threshold_map
from .grouping import (center_line, form_vshapes, locate_key_point, pair_parallel,
                       select_main_keypoints)
from .imagecore import binarize, largest_component, otsu_threshold, read_image, write_png
from .pipeline import PipelineConfig, PipelineReport, run_pipeline, run_stages
from .polyline import LineSegment, connect_broken, filter_short, fit_polyline
from .roi import PalmFrame, RoiImage, build_frame, extract_roi, roi_similarity
from .synth import GroundTruth, HandParams, generate_hand

__version__ = "0.1.0"
