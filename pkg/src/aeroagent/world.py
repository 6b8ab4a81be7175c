"""Planar arena geometry: coordinate frames, scenario generation, occupancy
rasterization, and the spatial predicates used by the episode loop.

The canonical frame is ENU (x East, y North, z Up) with yaw in degrees,
CCW-positive from the +x axis, normalized to (-180, 180]. NED appears only
at the `ned_to_enu` / `enu_to_ned` boundary.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from shapely.geometry import LineString, Point, box

from .errors import ScenarioInfeasible

VEHICLE_WINGSPAN = 0.56
VEHICLE_RADIUS = VEHICLE_WINGSPAN / 2.0
OBSTACLE_SIDE = 0.56
OBSTACLE_HEIGHT = 1.5
TARGET_OBSTACLE_CLEARANCE = 1.0
TARGET_START_MIN_DISTANCE = 0.5
GOAL_RADIUS = 0.5
FLIGHT_ALTITUDE = 1.0
DEFAULT_CELL_SIZE = 0.25
MAX_PLACEMENT_ATTEMPTS = 10_000

# Keeps the start cell provably free after inflation: 0.28 (vehicle radius)
# plus half the diagonal of a default 0.25 m cell, with margin.
START_OBSTACLE_CLEARANCE = 0.7

OBJECT_CLASSES = ("humanoid_robot", "drone", "quadcopter")


def normalize_yaw(deg: float) -> float:
    """Map an angle in degrees to the canonical (-180, 180] interval."""
    r = math.fmod(deg, 360.0)
    if r > 180.0:
        r -= 360.0
    elif r <= -180.0:
        r += 360.0
    return r


@dataclass(frozen=True)
class VehicleState:
    """Planar pose in the ENU frame; z is held at the flight altitude for
    the whole episode after takeoff."""

    x: float
    y: float
    z: float
    yaw: float

    def __post_init__(self):
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    @property
    def position2d(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class NedPose:
    """North-East-Down pose as used by the flight stack; yaw_ned is degrees
    CW-positive from North."""

    north: float
    east: float
    down: float
    yaw_ned: float


def ned_to_enu(pose: NedPose) -> VehicleState:
    """Convert a NED pose to the canonical ENU state.

    Raises ValueError on non-finite input. `enu_to_ned` is the exact
    inverse (bitwise, up to yaw normalization).
    """
    values = (pose.north, pose.east, pose.down, pose.yaw_ned)
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"non-finite NED pose: {pose}")
    return VehicleState(
        x=pose.east,
        y=pose.north,
        z=-pose.down,
        yaw=normalize_yaw(90.0 - pose.yaw_ned),
    )


def enu_to_ned(state: VehicleState) -> NedPose:
    """Inverse of `ned_to_enu`."""
    values = (state.x, state.y, state.z, state.yaw)
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"non-finite ENU state: {state}")
    return NedPose(
        north=state.y,
        east=state.x,
        down=-state.z,
        yaw_ned=normalize_yaw(90.0 - state.yaw),
    )


@dataclass(frozen=True)
class Boundary:
    x_min: float = 0.0
    x_max: float = 7.0
    y_min: float = 0.0
    y_max: float = 4.5
    z_min: float = 0.0
    z_max: float = 2.2

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max and self.z_min < self.z_max):
            raise ValueError("boundary must satisfy min < max on every axis")

    @property
    def span_x(self) -> float:
        return self.x_max - self.x_min

    @property
    def span_y(self) -> float:
        return self.y_max - self.y_min


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned square footprint; height exceeds the flight altitude, so
    altitude never clears an obstacle."""

    cx: float
    cy: float
    side: float = OBSTACLE_SIDE
    height: float = OBSTACLE_HEIGHT

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        h = self.side / 2.0
        return (self.cx - h, self.cy - h, self.cx + h, self.cy + h)

    def footprint(self):
        return box(*self.bounds)

    def distance_to_point(self, x: float, y: float) -> float:
        x0, y0, x1, y1 = self.bounds
        dx = max(x0 - x, x - x1, 0.0)
        dy = max(y0 - y, y - y1, 0.0)
        return math.hypot(dx, dy)


@dataclass(frozen=True)
class Target:
    x: float
    y: float
    object_class: str = "drone"

    def __post_init__(self):
        if self.object_class not in OBJECT_CLASSES:
            raise ValueError(f"unknown object class: {self.object_class!r}")


@dataclass(frozen=True)
class Scenario:
    boundary: Boundary
    obstacles: tuple[Obstacle, ...]
    target: Target
    start: VehicleState
    seed: int

    def to_json(self) -> str:
        """Deterministic JSON serialization; units are meters/degrees."""
        doc = {
            "boundary_m": {
                "x_min": self.boundary.x_min, "x_max": self.boundary.x_max,
                "y_min": self.boundary.y_min, "y_max": self.boundary.y_max,
                "z_min": self.boundary.z_min, "z_max": self.boundary.z_max,
            },
            "obstacles": [
                {"cx_m": o.cx, "cy_m": o.cy, "side_m": o.side, "height_m": o.height}
                for o in self.obstacles
            ],
            "target": {
                "x_m": self.target.x, "y_m": self.target.y,
                "object_class": self.target.object_class,
            },
            "start": {
                "x_m": self.start.x, "y_m": self.start.y,
                "z_m": self.start.z, "yaw_deg": self.start.yaw,
            },
            "seed": self.seed,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        doc = json.loads(text)
        b = doc["boundary_m"]
        return cls(
            boundary=Boundary(b["x_min"], b["x_max"], b["y_min"], b["y_max"],
                              b["z_min"], b["z_max"]),
            obstacles=tuple(
                Obstacle(o["cx_m"], o["cy_m"], o["side_m"], o["height_m"])
                for o in doc["obstacles"]
            ),
            target=Target(doc["target"]["x_m"], doc["target"]["y_m"],
                          doc["target"]["object_class"]),
            start=VehicleState(doc["start"]["x_m"], doc["start"]["y_m"],
                               doc["start"]["z_m"], doc["start"]["yaw_deg"]),
            seed=doc["seed"],
        )


@dataclass(frozen=True)
class ScenarioConfig:
    obstacle_count: int = 5
    boundary: Boundary = field(default_factory=Boundary)
    object_class: str = "drone"
    seed: int = 0


def default_start(boundary: Boundary) -> VehicleState:
    """Fixed start pose: near the west wall, mid-arena, facing East. The
    vehicle starts every episode of a run here."""
    return VehicleState(
        x=boundary.x_min + 0.5,
        y=(boundary.y_min + boundary.y_max) / 2.0,
        z=0.0,
        yaw=0.0,
    )


def generate_scenario(config: ScenarioConfig) -> Scenario:
    """Rejection-sample obstacle and target placements inside the boundary.

    Deterministic in config.seed. Raises ScenarioInfeasible after
    MAX_PLACEMENT_ATTEMPTS failed draws.
    """
    if config.obstacle_count < 0:
        raise ValueError("obstacle_count must be >= 0")
    rng = random.Random(config.seed)
    b = config.boundary
    start = default_start(b)
    half = OBSTACLE_SIDE / 2.0
    if b.span_x <= OBSTACLE_SIDE or b.span_y <= OBSTACLE_SIDE:
        raise ScenarioInfeasible("boundary too small for obstacle footprints")

    attempts = 0
    obstacles: list[Obstacle] = []
    while len(obstacles) < config.obstacle_count:
        if attempts >= MAX_PLACEMENT_ATTEMPTS:
            raise ScenarioInfeasible(
                f"obstacle placement failed after {attempts} attempts")
        attempts += 1
        cand = Obstacle(
            cx=rng.uniform(b.x_min + half, b.x_max - half),
            cy=rng.uniform(b.y_min + half, b.y_max - half),
        )
        if cand.distance_to_point(start.x, start.y) < START_OBSTACLE_CLEARANCE:
            continue
        obstacles.append(cand)

    while True:
        if attempts >= MAX_PLACEMENT_ATTEMPTS:
            raise ScenarioInfeasible(
                f"target placement failed after {attempts} attempts")
        attempts += 1
        tx = rng.uniform(b.x_min, b.x_max)
        ty = rng.uniform(b.y_min, b.y_max)
        if math.hypot(tx - start.x, ty - start.y) <= TARGET_START_MIN_DISTANCE:
            continue
        if any(o.distance_to_point(tx, ty) < TARGET_OBSTACLE_CLEARANCE
               for o in obstacles):
            continue
        target = Target(tx, ty, config.object_class)
        break

    return Scenario(boundary=b, obstacles=tuple(obstacles), target=target,
                    start=start, seed=config.seed)


@dataclass(frozen=True)
class OccupancyGrid:
    """Boolean rasterization of the arena; a cell is occupied iff it
    intersects any obstacle footprint inflated by the vehicle radius."""

    cell_size: float
    width: int
    height: int
    cells: bytes  # row-major, index = iy * width + ix; 1 = occupied
    x_min: float
    y_min: float

    def occupied(self, ix: int, iy: int) -> bool:
        return bool(self.cells[iy * self.width + ix])

    def in_grid(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        ix = min(int((x - self.x_min) / self.cell_size), self.width - 1)
        iy = min(int((y - self.y_min) / self.cell_size), self.height - 1)
        return (max(ix, 0), max(iy, 0))

    def center_of(self, ix: int, iy: int) -> tuple[float, float]:
        return (self.x_min + (ix + 0.5) * self.cell_size,
                self.y_min + (iy + 0.5) * self.cell_size)

    def occupied_count(self) -> int:
        return sum(self.cells)

    def to_pgm(self) -> str:
        """Plain-text PGM (P2) map for debugging; 0 = occupied, 1 = free.
        Rows run North to South so the text reads like a map."""
        lines = ["P2", f"{self.width} {self.height}", "1"]
        for iy in range(self.height - 1, -1, -1):
            row = self.cells[iy * self.width:(iy + 1) * self.width]
            lines.append(" ".join("0" if c else "1" for c in row))
        return "\n".join(lines) + "\n"


def rasterize(scenario: Scenario, cell_size: float = DEFAULT_CELL_SIZE,
              vehicle_radius: float = VEHICLE_RADIUS) -> OccupancyGrid:
    """Rasterize obstacle footprints, inflated by the vehicle radius, onto a
    grid covering the boundary. Raises ScenarioInfeasible if the start or
    target cell comes out occupied."""
    if cell_size <= 0:
        raise ValueError("cell_size must be > 0")
    b = scenario.boundary
    width = math.ceil(b.span_x / cell_size)
    height = math.ceil(b.span_y / cell_size)
    cells = bytearray(width * height)
    bounds = [o.bounds for o in scenario.obstacles]
    for iy in range(height):
        cy0 = b.y_min + iy * cell_size
        cy1 = cy0 + cell_size
        for ix in range(width):
            cx0 = b.x_min + ix * cell_size
            cx1 = cx0 + cell_size
            for (ox0, oy0, ox1, oy1) in bounds:
                dx = max(ox0 - cx1, cx0 - ox1, 0.0)
                dy = max(oy0 - cy1, cy0 - oy1, 0.0)
                if math.hypot(dx, dy) <= vehicle_radius:
                    cells[iy * width + ix] = 1
                    break
    grid = OccupancyGrid(cell_size=cell_size, width=width, height=height,
                         cells=bytes(cells), x_min=b.x_min, y_min=b.y_min)
    start_cell = grid.cell_of(scenario.start.x, scenario.start.y)
    target_cell = grid.cell_of(scenario.target.x, scenario.target.y)
    if grid.occupied(*start_cell):
        raise ScenarioInfeasible(f"start cell {start_cell} is occupied")
    if grid.occupied(*target_cell):
        raise ScenarioInfeasible(f"target cell {target_cell} is occupied")
    return grid


def check_bounds(state: VehicleState, boundary: Boundary) -> bool:
    """Closed-interval membership on all three axes."""
    return (boundary.x_min <= state.x <= boundary.x_max
            and boundary.y_min <= state.y <= boundary.y_max
            and boundary.z_min <= state.z <= boundary.z_max)


def segment_collides(p0: tuple[float, float], p1: tuple[float, float],
                     vehicle_radius: float,
                     obstacles: tuple[Obstacle, ...] | list[Obstacle]) -> bool:
    """True iff the disc of the given radius swept along p0->p1 touches any
    obstacle footprint (2D test)."""
    if vehicle_radius < 0:
        raise ValueError("vehicle_radius must be >= 0")
    if not obstacles:
        return False
    if p0 == p1:
        geom = Point(p0)
    else:
        geom = LineString([p0, p1])
    return any(geom.distance(o.footprint()) <= vehicle_radius for o in obstacles)


def goal_reached(state: VehicleState, target: Target) -> bool:
    """2D Euclidean distance to the target position within the 0.5 m goal
    radius, inclusive."""
    return math.hypot(state.x - target.x, state.y - target.y) <= GOAL_RADIUS
