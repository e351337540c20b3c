"""Complex pattern propagation factor: amplitude and absolute phase of a
radar field over terrain from a split-step parabolic-equation march and a
flat-earth two-ray model."""

from .domain import (
    MAG_FLOOR,
    SPEED_OF_LIGHT,
    ComplexSample,
    OutputWindow,
    Polarization,
    PpfResult,
    SourceSpec,
    db_from_linear,
    ppf_free_space_db,
    ppf_pe_db,
)
from .environment import (
    AntennaKind,
    AntennaPattern,
    Atmosphere,
    GroundComposition,
    RefractivityField,
    RefractivityProfile,
    TerrainProfile,
    m_unit_at,
    pattern_factor,
    phase_screen_column,
    reflection_coefficient,
    segment_slope,
    terrain_height_at,
)
from .fe_model import fe_complex_field, fe_region_valid, run_fe, total_phase_lag, trace_two_ray
from .pe_engine import (
    ComplexFieldGrid,
    PeConfig,
    PeState,
    build_free_space_propagator,
    default_pe_config,
    extract_complex_ppf,
    init_field,
    march_step,
    phase_continuity_report,
    run_pe,
    unwrap_phase,
)
from .pseudo3d import AzimuthFan, ElevationGrid, VolumeResult, export_volume, run_volume, sample_terrain_along_azimuth
from .scenario_io import (
    Scenario,
    parse_input_file,
    read_complex_field_export,
    read_elevation_grid,
    write_complex_field_export,
    write_elevation_grid,
    write_input_file,
    write_output_file,
)
from .turbine import (
    GE_36,
    VESTAS_V66,
    TurbinePlacement,
    TurbineSpec,
    blade_tip_speed,
    extraction_window,
    field_column_at_turbine,
)

__version__ = "0.1.0"

__all__ = [
    "MAG_FLOOR",
    "SPEED_OF_LIGHT",
    "ComplexSample",
    "OutputWindow",
    "Polarization",
    "PpfResult",
    "SourceSpec",
    "db_from_linear",
    "ppf_free_space_db",
    "ppf_pe_db",
    "AntennaKind",
    "AntennaPattern",
    "Atmosphere",
    "GroundComposition",
    "RefractivityField",
    "RefractivityProfile",
    "TerrainProfile",
    "m_unit_at",
    "pattern_factor",
    "phase_screen_column",
    "reflection_coefficient",
    "segment_slope",
    "terrain_height_at",
    "fe_complex_field",
    "fe_region_valid",
    "run_fe",
    "total_phase_lag",
    "trace_two_ray",
    "ComplexFieldGrid",
    "PeConfig",
    "PeState",
    "build_free_space_propagator",
    "default_pe_config",
    "extract_complex_ppf",
    "init_field",
    "march_step",
    "phase_continuity_report",
    "run_pe",
    "unwrap_phase",
    "AzimuthFan",
    "ElevationGrid",
    "VolumeResult",
    "export_volume",
    "run_volume",
    "sample_terrain_along_azimuth",
    "Scenario",
    "parse_input_file",
    "read_complex_field_export",
    "read_elevation_grid",
    "write_complex_field_export",
    "write_elevation_grid",
    "write_input_file",
    "write_output_file",
    "GE_36",
    "VESTAS_V66",
    "TurbinePlacement",
    "TurbineSpec",
    "blade_tip_speed",
    "extraction_window",
    "field_column_at_turbine",
]
