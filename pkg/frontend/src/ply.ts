// Minimal PLY parser (ascii / binary little-endian) for the scene mesh.

export interface ParsedMesh {
  positions: Float32Array; // xyz triples
  indices: Uint32Array; // triangle indices (polygons fan-triangulated)
}

const SCALAR_SIZES: Record<string, number> = {
  char: 1, int8: 1, uchar: 1, uint8: 1,
  short: 2, int16: 2, ushort: 2, uint16: 2,
  int: 4, int32: 4, uint: 4, uint32: 4,
  float: 4, float32: 4, double: 8, float64: 8,
};

type Property =
  | { kind: "scalar"; name: string; type: string }
  | { kind: "list"; name: string; countType: string; itemType: string };

interface Element {
  name: string;
  count: number;
  properties: Property[];
}

function readScalar(view: DataView, offset: number, type: string): [number, number] {
  switch (type) {
    case "char": case "int8": return [view.getInt8(offset), 1];
    case "uchar": case "uint8": return [view.getUint8(offset), 1];
    case "short": case "int16": return [view.getInt16(offset, true), 2];
    case "ushort": case "uint16": return [view.getUint16(offset, true), 2];
    case "int": case "int32": return [view.getInt32(offset, true), 4];
    case "uint": case "uint32": return [view.getUint32(offset, true), 4];
    case "float": case "float32": return [view.getFloat32(offset, true), 4];
    case "double": case "float64": return [view.getFloat64(offset, true), 8];
    default: throw new Error(`unsupported PLY type ${type}`);
  }
}

export function parsePly(data: ArrayBuffer): ParsedMesh {
  const bytes = new Uint8Array(data);
  const headerEnd = new TextDecoder()
    .decode(bytes.slice(0, Math.min(bytes.length, 65536)))
    .indexOf("end_header\n");
  if (headerEnd < 0) throw new Error("not a PLY file: missing end_header");
  const bodyStart = headerEnd + "end_header\n".length;
  const headerText = new TextDecoder().decode(bytes.slice(0, headerEnd));
  const lines = headerText.split(/\r?\n/);
  if (lines[0]?.trim() !== "ply") throw new Error("not a PLY file");

  let format = "";
  const elements: Element[] = [];
  for (const line of lines.slice(1)) {
    const parts = line.trim().split(/\s+/);
    if (!parts[0] || parts[0] === "comment") continue;
    if (parts[0] === "format") format = parts[1] ?? "";
    else if (parts[0] === "element") {
      elements.push({ name: parts[1] ?? "", count: Number(parts[2]), properties: [] });
    } else if (parts[0] === "property") {
      const el = elements[elements.length - 1];
      if (!el) throw new Error("PLY property before element");
      if (parts[1] === "list") {
        el.properties.push({
          kind: "list",
          name: parts[4] ?? "",
          countType: parts[2] ?? "",
          itemType: parts[3] ?? "",
        });
      } else {
        el.properties.push({ kind: "scalar", name: parts[2] ?? "", type: parts[1] ?? "" });
      }
    }
  }
  if (format !== "ascii" && format !== "binary_little_endian") {
    throw new Error(`unsupported PLY format ${format}`);
  }

  const store: Record<string, Record<string, number[] | number[][]>> = {};
  if (format === "ascii") {
    const tokens = new TextDecoder().decode(bytes.slice(bodyStart)).split(/\s+/).filter(Boolean);
    let pos = 0;
    for (const el of elements) {
      const cols: Record<string, number[] | number[][]> = {};
      for (const p of el.properties) cols[p.name] = [];
      for (let i = 0; i < el.count; i++) {
        for (const p of el.properties) {
          if (p.kind === "scalar") {
            (cols[p.name] as number[]).push(Number(tokens[pos++]));
          } else {
            const n = Number(tokens[pos++]);
            const items: number[] = [];
            for (let k = 0; k < n; k++) items.push(Number(tokens[pos++]));
            (cols[p.name] as number[][]).push(items);
          }
        }
      }
      store[el.name] = cols;
    }
  } else {
    const view = new DataView(data);
    let offset = bodyStart;
    for (const el of elements) {
      const cols: Record<string, number[] | number[][]> = {};
      for (const p of el.properties) cols[p.name] = [];
      for (let i = 0; i < el.count; i++) {
        for (const p of el.properties) {
          if (p.kind === "scalar") {
            const [value, size] = readScalar(view, offset, p.type);
            offset += size;
            (cols[p.name] as number[]).push(value);
          } else {
            const [n, countSize] = readScalar(view, offset, p.countType);
            offset += countSize;
            const items: number[] = [];
            const itemSize = SCALAR_SIZES[p.itemType] ?? 0;
            for (let k = 0; k < n; k++) {
              items.push(readScalar(view, offset, p.itemType)[0]);
              offset += itemSize;
            }
            (cols[p.name] as number[][]).push(items);
          }
        }
      }
      store[el.name] = cols;
    }
  }

  const vertex = store["vertex"];
  const face = store["face"];
  if (!vertex || !face) throw new Error("PLY needs vertex and face elements");
  const xs = vertex["x"] as number[] | undefined;
  const ys = vertex["y"] as number[] | undefined;
  const zs = vertex["z"] as number[] | undefined;
  if (!xs || !ys || !zs) throw new Error("PLY vertex element lacks x/y/z");
  const positions = new Float32Array(xs.length * 3);
  for (let i = 0; i < xs.length; i++) {
    positions[3 * i] = xs[i] as number;
    positions[3 * i + 1] = ys[i] as number;
    positions[3 * i + 2] = zs[i] as number;
  }
  const polys = (face["vertex_indices"] ?? face["vertex_index"]) as number[][] | undefined;
  if (!polys) throw new Error("PLY face element lacks vertex indices");
  const tris: number[] = [];
  for (const poly of polys) {
    for (let k = 1; k + 1 < poly.length; k++) {
      tris.push(poly[0] as number, poly[k] as number, poly[k + 1] as number);
    }
  }
  return { positions, indices: new Uint32Array(tris) };
}
