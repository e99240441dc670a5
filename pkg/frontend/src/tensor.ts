/** Decode the protocol's base64 little-endian float tensor blocks. */

import type { TensorBlock } from "./types.js";

// node's Buffer, when present (vitest); browsers take the atob path
declare const Buffer:
  | { from(data: string, encoding: string): Uint8Array }
  | undefined;

function base64Bytes(data: string): Uint8Array {
  if (typeof Buffer !== "undefined") {
    return new Uint8Array(Buffer.from(data, "base64"));
  }
  const bin = atob(data);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

export interface Tensor {
  shape: number[];
  values: Float64Array; // flattened, C order
}

export function decodeTensor(block: TensorBlock): Tensor {
  const bytes = base64Bytes(block.data);
  const itemSize = block.dtype.endsWith("8") ? 8 : 4;
  const count = bytes.byteLength / itemSize;
  const expected = block.shape.reduce((a, b) => a * b, 1);
  if (count !== expected) {
    throw new Error(`tensor block has ${count} values, shape needs ${expected}`);
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const values = new Float64Array(count);
  for (let i = 0; i < count; i++) {
    values[i] =
      itemSize === 8 ? view.getFloat64(i * 8, true) : view.getFloat32(i * 4, true);
  }
  return { shape: block.shape, values };
}

/** values[r][c] for a (H, W, C) or (H, W) tensor, channel-averaged. */
export function toGrayscaleGrid(tensor: Tensor): number[][] {
  const [h, w] = tensor.shape;
  const channels = tensor.shape.length > 2 ? tensor.shape[2] : 1;
  const grid: number[][] = [];
  for (let r = 0; r < h; r++) {
    const row: number[] = [];
    for (let c = 0; c < w; c++) {
      let sum = 0;
      for (let ch = 0; ch < channels; ch++) {
        sum += tensor.values[(r * w + c) * channels + ch];
      }
      row.push(sum / channels);
    }
    grid.push(row);
  }
  return grid;
}
