import { ServiceClient } from "./client.js";
import { NdArray, batchDims, capacity, ndarray, sameDims } from "./tensor.js";

/**
 * A parsed constraint plus its smoothing factor, immutable and reusable
 * across any number of forward/backward calls.
 */
export class BoundConstraint {
  private constructor(
    readonly client: ServiceClient,
    readonly handle: string,
    readonly gamma: number,
  ) {}

  static async bind(
    client: ServiceClient,
    formula: string,
    gamma: number,
  ): Promise<BoundConstraint> {
    const handle = await client.parseFormula(formula);
    return new BoundConstraint(client, handle, gamma);
  }

  async free(): Promise<void> {
    await this.client.free(this.handle);
  }
}

/**
 * Custom-function pair for a gradient-descent host.
 *
 * forward: Y = loss(rho, trace, t), shaped like the trace's batch axes.
 * backward: given dL/dY, computes dL/dtrace = dloss * dL/dY, one scalar
 * per batch slice. Nothing is saved between the passes; the engine
 * recomputes from the trace, so calls are reentrant.
 */
export class ConstraintLoss {
  constructor(readonly bound: BoundConstraint) {}

  async forward(trace: NdArray, t: number): Promise<NdArray> {
    const { client, handle, gamma } = this.bound;
    return client.loss(handle, trace, t, gamma);
  }

  async backward(trace: NdArray, t: number, upstream: NdArray): Promise<NdArray> {
    const expected = batchDims(trace.dims);
    if (!sameDims(upstream.dims, expected)) {
      throw new Error(
        `upstream gradient has dims [${upstream.dims}], the trace's batch axes are [${expected}]`,
      );
    }
    const { client, handle, gamma } = this.bound;
    const grad = await client.grad(handle, trace, t, gamma);
    // trace elements are laid out row-major with the batch axes innermost,
    // so element i belongs to batch slice i mod B
    const b = capacity(expected);
    const out = new Float64Array(grad.data.length);
    for (let i = 0; i < out.length; i++) {
      out[i] = grad.data[i] * upstream.data[i % b];
    }
    return ndarray(grad.dims, out);
  }
}
