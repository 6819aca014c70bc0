/**
 * Orientation info for the slice view corner widget: which plane the slice
 * sits on inside the 3D volume and which volume axes the screen axes map
 * to.  Keeping this explicit disambiguates the horizontal and vertical
 * axes of the slice view.
 */

export const AXIS_NAMES = ["X", "Y", "Z"] as const;

export interface OrientationInfo {
  /** the slice's normal axis, e.g. "Z" for an XY plane */
  normal: string;
  horizontal: string;
  vertical: string;
  /** e.g. "Z-normal plane (slice 3 of 8)" */
  caption: string;
}

const IN_PLANE: Record<number, [number, number]> = {
  0: [1, 2], // X slice: Y horizontal, Z vertical
  1: [0, 2], // Y slice: X horizontal, Z vertical
  2: [0, 1], // Z slice: X horizontal, Y vertical
};

export function orientationInfo(axis: number, index: number, count: number): OrientationInfo {
  const [h, v] = IN_PLANE[axis];
  return {
    normal: AXIS_NAMES[axis],
    horizontal: AXIS_NAMES[h],
    vertical: AXIS_NAMES[v],
    caption: `${AXIS_NAMES[axis]}-normal plane (slice ${index + 1} of ${count})`,
  };
}
