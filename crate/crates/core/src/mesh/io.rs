//! STL (binary and ASCII) and OBJ ingestion with vertex welding.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Seek, Write};
use std::path::Path;

use super::{MeshError, TriangleMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFormat {
    StlBinary,
    StlAscii,
    Obj,
}

impl MeshFormat {
    pub fn from_extension(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "stl" => Some(Self::StlBinary),
            "obj" => Some(Self::Obj),
            _ => None,
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<TriangleMesh, MeshError> {
    let mut reader = BufReader::new(File::open(path)?);
    match format {
        MeshFormat::StlBinary | MeshFormat::StlAscii => read_stl(&mut reader),
        MeshFormat::Obj => read_obj(reader),
    }
}

/// Reads an STL stream (binary or ASCII, detected from content) and welds the
/// independent facets into a shared-vertex mesh.
pub fn read_stl<R: Read + Seek>(reader: &mut R) -> Result<TriangleMesh, MeshError> {
    let facets = stl_io::create_stl_reader(reader)
        .map_err(|e| MeshError::Parse(e.to_string()))?
        .map(|t| {
            t.map(|t| t.vertices.map(|v| Vec3::new(v[0] as f64, v[1] as f64, v[2] as f64)))
        })
        .collect::<Result<Vec<[Vec3; 3]>, _>>()
        .map_err(|e| MeshError::Parse(e.to_string()))?;
    if facets.is_empty() {
        return Err(MeshError::Empty);
    }
    let corners: Vec<Vec3> = facets.iter().flatten().copied().collect();
    let (vertices, remap) = weld(&corners);
    let triangles = (0..facets.len())
        .map(|f| [remap[3 * f], remap[3 * f + 1], remap[3 * f + 2]])
        .collect();
    TriangleMesh::new(vertices, triangles)
}

/// Reads `v` and `f` records; every other record type is ignored. Polygonal
/// faces are fan-triangulated and `v/vt/vn` index forms are accepted.
pub fn read_obj<R: BufRead>(reader: R) -> Result<TriangleMesh, MeshError> {
    let mut positions: Vec<Vec3> = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<f64> = fields
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| MeshError::Parse(format!("line {}: {e}", lineno + 1)))?;
                if coords.len() != 3 {
                    return Err(MeshError::Parse(format!(
                        "line {}: vertex needs 3 coordinates",
                        lineno + 1
                    )));
                }
                positions.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx = fields
                    .map(|s| resolve_obj_index(s, positions.len()))
                    .collect::<Option<Vec<usize>>>()
                    .ok_or_else(|| MeshError::Parse(format!("line {}: bad face index", lineno + 1)))?;
                if idx.len() < 3 {
                    return Err(MeshError::Parse(format!(
                        "line {}: face needs at least 3 vertices",
                        lineno + 1
                    )));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    if positions.is_empty() {
        return Err(MeshError::Empty);
    }
    let (vertices, remap) = weld(&positions);
    let triangles = triangles.into_iter().map(|t: [usize; 3]| t.map(|i| remap[i])).collect();
    TriangleMesh::new(vertices, triangles)
}

fn resolve_obj_index(token: &str, count: usize) -> Option<usize> {
    let raw: i64 = token.split('/').next()?.parse().ok()?;
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        count as i64 + raw
    } else {
        return None;
    };
    (0..count as i64).contains(&idx).then_some(idx as usize)
}

/// Merges points closer than 1e-9 · (bounding-box diagonal). Returns the
/// unique points and the index of each input point among them.
fn weld(points: &[Vec3]) -> (Vec<Vec3>, Vec<usize>) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let tol = 1e-9 * (hi - lo).norm();
    if !(tol > 0.0) {
        return (points.to_vec(), (0..points.len()).collect());
    }
    let cell = |p: &Vec3| -> [i64; 3] {
        let q = (p - lo) / tol;
        [q.x.floor() as i64, q.y.floor() as i64, q.z.floor() as i64]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut unique: Vec<Vec3> = Vec::new();
    let mut remap = Vec::with_capacity(points.len());
    for p in points {
        let c = cell(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if let Some(&u) = bucket.iter().find(|&&u| (unique[u] - p).norm() <= tol) {
                            found = Some(u);
                            break 'search;
                        }
                    }
                }
            }
        }
        let id = found.unwrap_or_else(|| {
            unique.push(*p);
            grid.entry(c).or_default().push(unique.len() - 1);
            unique.len() - 1
        });
        remap.push(id);
    }
    (unique, remap)
}

fn stl_triangles(mesh: &TriangleMesh) -> Vec<stl_io::Triangle> {
    mesh.panels()
        .iter()
        .map(|p| stl_io::Triangle {
            normal: stl_io::Normal::new(p.normal.map(|c| c as f32).into()),
            vertices: p
                .vertices
                .map(|v| stl_io::Vertex::new(v.map(|c| c as f32).into())),
        })
        .collect()
}

pub fn write_stl_binary<W: Write>(mesh: &TriangleMesh, writer: &mut W) -> Result<(), MeshError> {
    stl_io::write_stl(writer, stl_triangles(mesh).iter())?;
    Ok(())
}

pub fn write_stl_ascii<W: Write>(mesh: &TriangleMesh, writer: &mut W) -> Result<(), MeshError> {
    writeln!(writer, "solid mesh")?;
    for p in mesh.panels() {
        let n = p.normal;
        writeln!(writer, "  facet normal {:e} {:e} {:e}", n.x, n.y, n.z)?;
        writeln!(writer, "    outer loop")?;
        for v in p.vertices {
            writeln!(writer, "      vertex {:e} {:e} {:e}", v.x, v.y, v.z)?;
        }
        writeln!(writer, "    endloop")?;
        writeln!(writer, "  endfacet")?;
    }
    writeln!(writer, "endsolid mesh")?;
    Ok(())
}

pub fn write_obj<W: Write>(mesh: &TriangleMesh, writer: &mut W) -> Result<(), MeshError> {
    for v in mesh.vertices() {
        writeln!(writer, "v {:e} {:e} {:e}", v.x, v.y, v.z)?;
    }
    for t in mesh.triangles() {
        writeln!(writer, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}
