import { describe, expect, it } from "vitest";

import { parsePly } from "../src/ply";

function ascii(text: string): ArrayBuffer {
  const bytes = new TextEncoder().encode(text);
  return bytes.buffer.slice(bytes.byteOffset, bytes.byteOffset + bytes.byteLength) as ArrayBuffer;
}

const ASCII_PLY = `ply
format ascii 1.0
comment a unit quad
element vertex 4
property float x
property float y
property float z
element face 2
property list uchar int vertex_indices
end_header
0 0 0
1 0 0
1 1 0
0 1 0
3 0 1 2
3 0 2 3
`;

function binaryPly(): ArrayBuffer {
  const header =
    "ply\nformat binary_little_endian 1.0\nelement vertex 3\n" +
    "property float x\nproperty float y\nproperty float z\n" +
    "element face 1\nproperty list uchar int vertex_indices\nend_header\n";
  const headerBytes = new TextEncoder().encode(header);
  const body = new ArrayBuffer(3 * 12 + 1 + 12);
  const view = new DataView(body);
  const verts = [0, 0, 0, 2, 0, 0, 0, 2, 0];
  verts.forEach((v, i) => view.setFloat32(i * 4, v, true));
  view.setUint8(36, 3);
  [0, 1, 2].forEach((idx, i) => view.setInt32(37 + 4 * i, idx, true));
  const out = new Uint8Array(headerBytes.length + body.byteLength);
  out.set(headerBytes, 0);
  out.set(new Uint8Array(body), headerBytes.length);
  return out.buffer;
}

describe("parsePly", () => {
  it("parses ascii with fan triangulation", () => {
    const mesh = parsePly(ascii(ASCII_PLY));
    expect(mesh.positions).toHaveLength(12);
    expect([...mesh.indices]).toEqual([0, 1, 2, 0, 2, 3]);
  });

  it("parses binary little-endian", () => {
    const mesh = parsePly(binaryPly());
    expect([...mesh.positions.slice(3, 6)]).toEqual([2, 0, 0]);
    expect([...mesh.indices]).toEqual([0, 1, 2]);
  });

  it("rejects non-PLY data", () => {
    expect(() => parsePly(ascii("hello world"))).toThrow();
  });
});
