/**
 * Unit conversion for the vicinity dial: radians <-> minimum cosine
 * similarity. This is the only numeric computation the console performs;
 * every other displayed number is a verbatim token from a service response.
 */

export const MIN_THETA = 1e-6;
export const MAX_THETA = Math.PI / 2;

export function radiansToCosine(theta: number): number {
  return Math.cos(theta);
}

export function cosineToRadians(cosine: number): number {
  return Math.acos(Math.min(1, Math.max(-1, cosine)));
}

/** Clamp a dial value into the service's accepted open-interval (0, pi/2]. */
export function clampTheta(theta: number): number {
  if (!Number.isFinite(theta)) return MIN_THETA;
  return Math.min(MAX_THETA, Math.max(MIN_THETA, theta));
}

/** Slider positions are valid only strictly above zero. */
export function isValidTheta(theta: number): boolean {
  return Number.isFinite(theta) && theta > 0 && theta <= MAX_THETA;
}
