"""Spin-boson model of asymmetric molecular dimers: exact diagonalization,
Bloch and Husimi eigenstate analysis, and optical absorption bands."""
from .absorption import (OpticalParams, RatioCurve, StickSpectrum, absorption_strength,
                         absorption_strengths, band_windows, interpolate_band, ratio_curve,
                         spin_direction, spin_ratio, stick_spectrum, transition_element)
from .adiabatic import (Branch, Orbit, adiabatic_bloch, adiabatic_mixing, adiabatic_potentials,
                        adiabatic_states, classical_orbit, franck_condon_energies)
from .model import (SET_A, SET_B, BasisSpec, DimerParams, ModelParams, SymmetricBandMatrix,
                    build_hamiltonian, hamiltonian_element, reduce_dimer_params)
from .phase_analysis import (HusimiGrid, PhasePoint, bloch_projection, bloch_scan, husimi_grid,
                             husimi_value, parity_expectation)
from .spectrum import ConvergenceReport, EigenSystem, convergence_check, diagonalize, solve
from .spin import SpinProjection

__version__ = "0.1.0"
