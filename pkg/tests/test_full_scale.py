"""Opt-in full-scale sweep reproduction (ridge T=1e5, svm T=1e4, 30 seeds,
the complete learner x corruption grid), ~15 minutes on one core.

Golden checkpoint values were frozen from a calibration run of this exact
configuration; a fresh run must match them to within 3 pooled standard
errors (identical seeds reproduce them exactly; the tolerance covers
platform/BLAS drift). Enable with ROBUST_OCO_FULL_SCALE=1.
"""

import math
import os

import pytest

import robust_oco as ro
from robust_oco import stream as st

pytestmark = pytest.mark.skipif(
    not os.environ.get("ROBUST_OCO_FULL_SCALE"),
    reason="full-scale sweep is opt-in: set ROBUST_OCO_FULL_SCALE=1")

SEEDS = list(range(1, 31))

# cell -> (checkpoint round indices, golden means, golden standard errors)
GOLDEN = {
    "ridge_learn_k0": ((24999, 49999, 74999, 99999), (1022.778079, 1024.041315, 1025.304404, 1026.567597), (1.251868, 1.251878, 1.251895, 1.251908)),
    "ridge_learn_k2154": ((24999, 49999, 74999, 99999), (1056.120986, 1074.968470, 1094.262091, 1113.312737), (1.603247, 1.567319, 1.556268, 1.580846)),
    "ridge_learn_k25000": ((24999, 49999, 74999, 99999), (1986.282618, 2917.601683, 3859.168010, 4784.576848), (6.234190, 8.511719, 10.600017, 11.685266)),
    "ridge_learn_k316": ((24999, 49999, 74999, 99999), (1027.132744, 1030.258888, 1033.425747, 1036.640993), (1.292926, 1.302786, 1.292663, 1.300565)),
    "ridge_ogd_k0": ((24999, 49999, 74999, 99999), (118.224150, 119.498409, 120.772461, 122.046663), (0.220220, 0.220223, 0.220236, 0.220234)),
    "ridge_ogd_k2154": ((24999, 49999, 74999, 99999), (456.924331, 795.434576, 1144.487438, 1490.111360), (4.351005, 5.828038, 6.408945, 7.798468)),
    "ridge_ogd_k25000": ((24999, 49999, 74999, 99999), (3655.998230, 7223.975347, 10835.557199, 14418.993685), (12.743819, 17.448623, 23.359516, 28.021158)),
    "ridge_ogd_k316": ((24999, 49999, 74999, 99999), (167.690868, 218.979413, 271.521308, 324.762205), (1.758454, 2.168580, 2.045275, 2.638876)),
    "ridge_topk_k0": ((24999, 49999, 74999, 99999), (118.224150, 119.498409, 120.772461, 122.046663), (0.220220, 0.220223, 0.220236, 0.220234)),
    "ridge_topk_k2154": ((24999, 49999, 74999, 99999), (3325.016524, 3388.479957, 3477.626411, 3585.112908), (13.850440, 14.036103, 14.681875, 14.310372)),
    "ridge_topk_k25000": ((24999, 49999, 74999, 99999), (18706.533131, 24275.888423, 24653.958721, 25303.385939), (39.658849, 67.018008, 67.401775, 68.586821)),
    "ridge_topk_k316": ((24999, 49999, 74999, 99999), (741.946535, 759.110971, 778.412879, 802.102108), (5.707477, 6.075578, 6.040456, 6.132943)),
    "ridge_utopk_k0": ((24999, 49999, 74999, 99999), (118.224150, 119.498409, 120.772461, 122.046663), (0.220220, 0.220223, 0.220236, 0.220234)),
    "ridge_utopk_k2154": ((24999, 49999, 74999, 99999), (2612.498719, 2691.985466, 2803.427420, 2934.490917), (11.914555, 12.064162, 12.502334, 12.673405)),
    "ridge_utopk_k25000": ((24999, 49999, 74999, 99999), (18171.398257, 18709.317562, 19334.433207, 20302.529394), (36.142136, 41.202887, 41.907314, 43.818797)),
    "ridge_utopk_k316": ((24999, 49999, 74999, 99999), (612.847253, 632.775098, 655.766045, 682.839624), (4.821385, 5.274184, 5.157403, 5.217980)),
    "svm_learn_k0": ((2499, 4999, 7499, 9999), (244.656134, 389.561698, 506.524119, 610.898071), (2.270397, 2.356134, 3.187363, 3.499809)),
    "svm_learn_k100": ((2499, 4999, 7499, 9999), (263.873211, 440.817314, 596.834383, 747.758431), (2.511272, 2.912342, 3.590200, 4.055505)),
    "svm_learn_k2500": ((2499, 4999, 7499, 9999), (668.947506, 1330.989244, 1994.301404, 2659.379091), (3.407287, 5.391085, 7.816321, 9.063884)),
    "svm_learn_k464": ((2499, 4999, 7499, 9999), (345.671763, 654.986372, 955.561924, 1263.071235), (3.587028, 4.390931, 4.392334, 4.229027)),
    "svm_ogd_k0": ((2499, 4999, 7499, 9999), (149.083043, 238.470875, 311.147968, 374.689872), (2.118260, 2.918657, 3.381070, 3.913418)),
    "svm_ogd_k100": ((2499, 4999, 7499, 9999), (210.597295, 400.147851, 580.554792, 760.615271), (3.232622, 4.643114, 5.639787, 5.850559)),
    "svm_ogd_k2500": ((2499, 4999, 7499, 9999), (1079.205378, 2147.364911, 3218.885945, 4296.900661), (7.700951, 12.832206, 17.920049, 19.778128)),
    "svm_ogd_k464": ((2499, 4999, 7499, 9999), (401.489485, 804.788290, 1195.281899, 1591.318637), (5.846795, 8.304262, 9.212515, 10.427086)),
    "svm_topk_k0": ((2499, 4999, 7499, 9999), (149.083043, 238.470875, 311.147968, 374.689872), (2.118260, 2.918657, 3.381070, 3.913418)),
    "svm_topk_k100": ((2499, 4999, 7499, 9999), (302.615698, 479.903433, 653.998183, 829.043133), (3.800191, 6.337478, 7.763376, 8.003262)),
    "svm_topk_k2500": ((2499, 4999, 7499, 9999), (1872.328939, 2580.077094, 3453.869987, 4382.728505), (2.961121, 10.851301, 15.314652, 19.402497)),
    "svm_topk_k464": ((2499, 4999, 7499, 9999), (715.494518, 1058.960497, 1413.418742, 1781.009895), (6.137294, 8.147742, 8.183504, 8.904821)),
    "svm_utopk_k0": ((2499, 4999, 7499, 9999), (149.083043, 238.470875, 311.147968, 374.689872), (2.118260, 2.918657, 3.381070, 3.913418)),
    "svm_utopk_k100": ((2499, 4999, 7499, 9999), (277.676750, 455.757456, 632.430433, 807.622124), (4.147932, 6.002455, 7.007451, 7.623193)),
    "svm_utopk_k2500": ((2499, 4999, 7499, 9999), (1586.349357, 2364.399711, 3305.122415, 4269.666290), (5.719126, 11.803779, 15.479587, 17.760952)),
    "svm_utopk_k464": ((2499, 4999, 7499, 9999), (629.263842, 985.497954, 1348.290126, 1725.276380), (5.245582, 7.706922, 8.406547, 8.667553)),
}


def _cells(family, T):
    for k in st.k_grid(T):
        for learner in ("ogd", "learn", "topk", "utopk"):
            yield k, learner, f"{family}_{learner}_k{k}"


@pytest.mark.parametrize("family,T", [("svm", 10 ** 4), ("ridge", 10 ** 5)])
def test_full_scale_sweep_matches_golden_curves(family, T):
    for k, learner, key in _cells(family, T):
        cfg = ro.preset_config(family, T=T, seeds=SEEDS, learner=learner, k=k)
        res = ro.run_cell(cfg)
        checkpoints, means, errs = GOLDEN[key]
        for i, m, e in zip(checkpoints, means, errs):
            fresh_m, fresh_e = float(res.mean[i]), float(res.stderr[i])
            tol = 3.0 * math.sqrt(e * e + fresh_e * fresh_e) + 1e-6 * max(1.0, abs(m))
            assert abs(fresh_m - m) <= tol, (
                f"{key} round {i + 1}: fresh {fresh_m:.3f} vs golden {m:.3f} (tol {tol:.3f})")

