"""Image trinarization with a three-well reaction-diffusion equation."""

from .grid import L0, L1, LMID, GridSpec, grid_spec, load_grayscale, save_trimap
from .postprocess import DiskKernel, apply_mask, build_mask, closing, quantize
from .reaction import ModelParams, check_stability, classify_equilibria, max_abs_source, source
from .solver import SolveOutcome, default_params, solve, step, step_matrix_form
from .pipeline import segment
from .evaluate import EvalReport, score, sweep, who_ratio

__version__ = "0.1.0"
