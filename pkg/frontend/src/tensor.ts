/** Row-major value block: a dims header plus one contiguous float64 buffer. */
export interface NdArray {
  readonly dims: readonly number[];
  readonly data: Float64Array;
}

export function capacity(dims: readonly number[]): number {
  let n = 1;
  for (const d of dims) {
    n *= d;
  }
  return n;
}

export function ndarray(dims: readonly number[], values: ArrayLike<number>): NdArray {
  if (values.length !== capacity(dims)) {
    throw new Error(
      `buffer holds ${values.length} values but dims [${dims}] need ${capacity(dims)}`,
    );
  }
  return { dims: [...dims], data: Float64Array.from(values) };
}

export function zeros(dims: readonly number[]): NdArray {
  return { dims: [...dims], data: new Float64Array(capacity(dims)) };
}

export function ones(dims: readonly number[]): NdArray {
  return { dims: [...dims], data: new Float64Array(capacity(dims)).fill(1) };
}

export function sameDims(a: readonly number[], b: readonly number[]): boolean {
  return a.length === b.length && a.every((d, i) => d === b[i]);
}

/** Trailing axes of a trace shape (d0, d1, batch...) index independent traces. */
export function batchDims(traceDims: readonly number[]): number[] {
  return [...traceDims.slice(2)];
}

/** Wire form used by the service: {"dims": [...], "elems": [...]}. */
export interface TensorJson {
  dims: number[];
  elems: number[];
}

export function toJson(a: NdArray): TensorJson {
  return { dims: [...a.dims], elems: Array.from(a.data) };
}

export function fromJson(wire: TensorJson): NdArray {
  return ndarray(wire.dims, wire.elems);
}
