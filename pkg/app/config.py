from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Geometry: absolute tolerance on unit-scale coordinates
    geometry_tol: float = 1e-9
    # Relative per-entry tolerance when comparing congruence signatures
    congruence_tol: float = 1e-6

    # Finite elements
    default_level: int = 4
    default_count: int = 10
    # Interior-node count above which the sparse shift-invert solver is used
    dense_max_nodes: int = 3000

    # Heat trace: omitted tail must stay below this fraction of the trace
    heat_tail_ratio: float = 1e-6
    # Largest acceptable condition number of the weighted fit design matrix
    heat_max_condition: float = 1e12
    # Numerical headroom for the default window, A/(4 pi t) <= this
    heat_max_leading: float = 1e4

    # Inverse procedures
    angle_scan_points: int = 10_000
    algebraic_tol: float = 1e-10
    root_tol: float = 1e-10
    regeneration_tol: float = 1e-8

    # Billiards: reflection-law defect under which an orbit counts as admissible
    orbit_defect_tol: float = 1e-6
    orbit_resolution: int = 32

    # Isoperimetric optimizer
    optimizer_max_iter: int = 4000
    optimizer_tol: float = 1e-10
    # Interior angles are kept inside [guard, pi - guard]
    angle_guard: float = 1e-3

    # Runs
    random_seed: int = 20240607
    output_dir: str = "runs"
    log_level: str = "INFO"

    model_config = {"env_file": ".env"}


settings = Settings()
