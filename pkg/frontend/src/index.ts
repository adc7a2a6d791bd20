export {
  NdArray,
  TensorJson,
  batchDims,
  capacity,
  fromJson,
  ndarray,
  ones,
  sameDims,
  toJson,
  zeros,
} from "./tensor.js";
export { ServiceClient, ServiceError } from "./client.js";
export { BoundConstraint, ConstraintLoss } from "./autograd.js";
export { GradCheckReport, gradientCheck, mulberry32 } from "./gradcheck.js";
