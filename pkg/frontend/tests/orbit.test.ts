import { describe, expect, it } from "vitest";

import { applyDrag, applyZoom, defaultOrbit, poseFromOrbit } from "../src/orbit.js";

const close = (a: number[], b: number[], tol = 1e-12) =>
  a.every((v, i) => Math.abs(v - b[i]) < tol);

describe("orbit camera math", () => {
  it("the default orbit reproduces the canonical base pose", () => {
    const pose = poseFromOrbit(defaultOrbit(2.0));
    expect(close(pose.position, [0, 0, 0])).toBe(true);
    expect(close(pose.target, [0, 0, 2])).toBe(true);
  });

  it("a 90-degree azimuth drag orbits the position a quarter turn around the target", () => {
    const orbit = applyDrag(defaultOrbit(2.0), Math.PI / 2, 0);
    const pose = poseFromOrbit(orbit);
    // from (0,0,0) quarter-circle to the side of the target at (0,0,2)
    expect(close(pose.position, [2, 0, 2], 1e-9)).toBe(true);
    // radius is preserved
    const r = Math.hypot(
      pose.position[0] - pose.target[0],
      pose.position[1] - pose.target[1],
      pose.position[2] - pose.target[2],
    );
    expect(r).toBeCloseTo(2.0, 9);
  });

  it("elevation raises the camera and is clamped at the poles", () => {
    const up = poseFromOrbit(applyDrag(defaultOrbit(2.0), 0, 0.5));
    expect(up.position[1]).toBeLessThan(0); // y-down world: raised camera has negative y
    const clamped = applyDrag(defaultOrbit(2.0), 0, 99);
    expect(clamped.elevation).toBeLessThan(Math.PI / 2);
  });

  it("zoom scales the radius within bounds", () => {
    let orbit = defaultOrbit(2.0);
    for (let i = 0; i < 100; i++) {
      orbit = applyZoom(orbit, 0.5);
    }
    expect(orbit.radius).toBeGreaterThanOrEqual(0.2);
    orbit = applyZoom(orbit, 1e9);
    expect(orbit.radius).toBeLessThanOrEqual(50);
  });
});
