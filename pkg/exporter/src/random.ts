/** Deterministic random numbers for the projection matrix.
 *
 * A projection must be a pure function of its seed, so we use a fixed,
 * documented generator (splitmix64 core, Box-Muller transform) rather than
 * anything platform- or library-version-dependent.
 */

/** 64-bit splitmix generator yielding doubles in [0, 1). */
export class SeededRng {
  private state: bigint;

  constructor(seed: number) {
    if (!Number.isInteger(seed) || seed < 0) {
      throw new RangeError(`seed must be a non-negative integer, got ${seed}`);
    }
    this.state = BigInt(seed);
  }

  /** Uniform double in [0, 1) with 53 random bits. */
  nextUniform(): number {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & 0xffffffffffffffffn;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & 0xffffffffffffffffn;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & 0xffffffffffffffffn;
    z = z ^ (z >> 31n);
    return Number(z >> 11n) / 2 ** 53;
  }

  /** Standard normal via Box-Muller (one value per pair, cached). */
  private spare: number | null = null;

  nextGaussian(): number {
    if (this.spare !== null) {
      const value = this.spare;
      this.spare = null;
      return value;
    }
    let u = 0;
    do {
      u = this.nextUniform();
    } while (u === 0);
    const v = this.nextUniform();
    const radius = Math.sqrt(-2 * Math.log(u));
    this.spare = radius * Math.sin(2 * Math.PI * v);
    return radius * Math.cos(2 * Math.PI * v);
  }
}
