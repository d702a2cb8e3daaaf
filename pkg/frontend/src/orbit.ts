/** Orbit camera math: spherical coordinates around a target point.
 *
 * The scenes use a y-down right-handed frame with the display volume along
 * +z, so azimuth 0 / elevation 0 / radius == focal distance reproduces the
 * canonical base pose at the origin.  Elevation raises the camera.
 */

import type { Orbit, PoseSpec } from "./types.js";

const MAX_ELEVATION = Math.PI / 2 - 0.05;

export function poseFromOrbit(orbit: Orbit): PoseSpec {
  const { azimuth, elevation, radius, target } = orbit;
  const ce = Math.cos(elevation);
  const position = [
    target[0] + radius * Math.sin(azimuth) * ce,
    target[1] - radius * Math.sin(elevation),
    target[2] - radius * Math.cos(azimuth) * ce,
  ];
  return { position, target: [...target], up: [0, -1, 0] };
}

export function applyDrag(orbit: Orbit, dAzimuth: number, dElevation: number): Orbit {
  return {
    ...orbit,
    azimuth: orbit.azimuth + dAzimuth,
    elevation: clamp(orbit.elevation + dElevation, -MAX_ELEVATION, MAX_ELEVATION),
  };
}

export function applyZoom(orbit: Orbit, factor: number): Orbit {
  return { ...orbit, radius: clamp(orbit.radius * factor, 0.2, 50) };
}

export function defaultOrbit(focal: number): Orbit {
  return { azimuth: 0, elevation: 0, radius: focal, target: [0, 0, focal] };
}

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(Math.max(v, lo), hi);
}
