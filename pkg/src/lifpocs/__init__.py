"""Reconstruction of bandlimited signals from leaky integrate-and-fire spike trains."""

__version__ = '0.1.0'

from .signal import PeriodicBandlimitedSignal, TimeGrid, random_bandlimited, mse_db  # noqa: E402
from .encoder import LifParams, SpikeTrain, encode, calibrate_threshold, quantize_times  # noqa: E402
from .kernels import KernelSystem, build_system  # noqa: E402
from .pocs import PocsState, pocs_run, pseudo_inverse  # noqa: E402
from .reconstruct import (WienerFilter, feichtinger_estimate, lazar_iterate,  # noqa: E402
                          naive_estimate, wiener_apply, wiener_fit)

__all__ = ['PeriodicBandlimitedSignal', 'TimeGrid', 'random_bandlimited', 'mse_db',
           'LifParams', 'SpikeTrain', 'encode', 'calibrate_threshold', 'quantize_times',
           'KernelSystem', 'build_system', 'PocsState', 'pocs_run', 'pseudo_inverse',
           'WienerFilter', 'feichtinger_estimate', 'lazar_iterate', 'naive_estimate',
           'wiener_apply', 'wiener_fit']
