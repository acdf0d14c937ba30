"""Conforming Galerkin solver and verification lab for a linearized coupled
thermoelastic-solid / viscous-thermofluid medium on the unit box.

Submodules
----------
params
    Dimensional constants and the dimensionless groups driving the model.
geometry
    Structured interface-aligned meshes with a per-cell phase indicator.
assembly
    Multilinear Galerkin matrices, probe forms, and load vectors.
forcing
    Body-force / heat-source envelopes and initial-data presets.
integrator
    Midpoint (Crank-Nicolson) time stepping and trajectory storage.
pressures
    Pressure reconstruction and phase-mean normalization.
diagnostics
    Energy audits, growth-constant estimates, norm series, slope fits.
limits
    Incompressibility / solidification parameter sweeps and the direct
    rigid-skeleton limit solve.
cli
    Deterministic command-line front end.

The package root resolves its re-exports lazily (PEP 562) so importing
:mod:`thermofsi` stays numpy-free; the command-line entry point relies on
that to pin the BLAS thread pools (``THERMOFSI_THREADS``) before numpy
first loads.
"""

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    # errors
    "ParameterError": "errors",
    "GeometryError": "errors",
    "SolverError": "errors",
    "ConfigError": "errors",
    # params
    "PhysicalParams": "params",
    "DimensionlessParams": "params",
    "ValidationReport": "params",
    "nondimensionalize": "params",
    "validate": "params",
    "reference_physical": "params",
    # geometry
    "SolidSlab": "geometry",
    "FluidInclusion": "geometry",
    "MediumGeometry": "geometry",
    "build_geometry": "geometry",
    "refine": "geometry",
    "CoefficientFields": "geometry",
    "coefficient_fields": "geometry",
    # assembly
    "DofMaps": "assembly",
    "Basis": "assembly",
    "ProbeMatrices": "assembly",
    "AssembledSystem": "assembly",
    "dof_maps": "assembly",
    "build_basis": "assembly",
    "eval_scalar": "assembly",
    "eval_vector": "assembly",
    "assemble_system": "assembly",
    "with_params": "assembly",
    "LoadAssembler": "assembly",
    "solid_vector_dofs": "assembly",
    "korn_constant": "assembly",
    "dump_matrix_triplets": "assembly",
    # forcing
    "Constant": "forcing",
    "SmoothRamp": "forcing",
    "Sine": "forcing",
    "ZeroForce": "forcing",
    "Gravity": "forcing",
    "CustomForce": "forcing",
    "ZeroHeat": "forcing",
    "Bump": "forcing",
    "CustomHeat": "forcing",
    "Forcing": "forcing",
    "InitialData": "forcing",
    "homogeneous": "forcing",
    "compression_kick": "forcing",
    "fluid_kick": "forcing",
    "ForcingOperator": "forcing",
    # integrator
    "State": "integrator",
    "Trajectory": "integrator",
    "project_initial": "integrator",
    "CrankNicolson": "integrator",
    "integrate": "integrator",
    "dump_trajectory": "integrator",
    "load_trajectory": "integrator",
    "TRAJECTORY_MAGIC": "integrator",
    "TRAJECTORY_VERSION": "integrator",
    # pressures
    "PressureFields": "pressures",
    "reconstruct": "pressures",
    "normalize": "pressures",
    "write_pressure_csv": "pressures",
    # diagnostics
    "EnergyReport": "diagnostics",
    "BoundCheck": "diagnostics",
    "energy_audit": "diagnostics",
    "write_energy_csv": "diagnostics",
    "energy_estimate_series": "diagnostics",
    "check_energy_estimate": "diagnostics",
    "derivative_initial_state": "diagnostics",
    "check_time_derivative_estimate": "diagnostics",
    "check_deformation_bounds": "diagnostics",
    "NORM_NAMES": "diagnostics",
    "norm_series": "diagnostics",
    "write_norms_csv": "diagnostics",
    "fit_loglog_slope": "diagnostics",
    "self_convergence_ratio": "diagnostics",
    # limits
    "SWEEP_MODES": "limits",
    "SweepPlan": "limits",
    "LimitReport": "limits",
    "run_sweep": "limits",
    "check_q_equals_p_limit": "limits",
    "check_pressure_boundedness": "limits",
    "C2Solution": "limits",
    "solve_c2": "limits",
    "c2_residual": "limits",
    "write_sweep_csv": "limits",
}

__all__ = sorted(_EXPORTS) + ["__version__"]


def __getattr__(name):
    try:
        module_name = _EXPORTS[name]
    except KeyError:
        raise AttributeError(
            f"module {__name__!r} has no attribute {name!r}") from None
    module = importlib.import_module(f".{module_name}", __name__)
    value = getattr(module, name)
    globals()[name] = value  # cache so the import runs once
    return value


def __dir__():
    return sorted(set(globals()) | set(_EXPORTS))
