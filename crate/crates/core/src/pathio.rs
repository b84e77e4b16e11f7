//! Canonical JSON encodings for matrices, paths, loops, holonomies, and
//! index reports.
//!
//! Documents are objects with sorted keys and shortest round-trip decimals;
//! matrices are arrays of rows. Every document carries a `schema_version`
//! and unknown versions are rejected.

use crate::error::{Error, Result};
use crate::indices::{IndexReport, IndexValue, SymplecticPath};
use crate::linalg::Mat;
use crate::maslov::{CoisotropicLoop, HolonomyPath};
use crate::sympcore::{validate_symplectic, Subspace, SymplecticMatrix, Tolerances};
use serde_json::{Map, Number, Value};

pub const MATRIX_SCHEMA: &str = "matrix/1";
pub const PATH_SCHEMA: &str = "symplectic-path/1";
pub const LOOP_SCHEMA: &str = "coisotropic-loop/1";
pub const HOLONOMY_SCHEMA: &str = "holonomy/1";
pub const REPORT_SCHEMA: &str = "index-report/1";

/// Symplecticity tolerance applied when loading documents.
pub const LOAD_TOLERANCE: f64 = 1e-8;

pub type Metadata = Map<String, Value>;

fn number(x: f64, what: &str) -> Result<Value> {
    Number::from_f64(x)
        .map(Value::Number)
        .ok_or_else(|| Error::Document(format!("{what} is not finite")))
}

pub fn matrix_to_value(m: &Mat) -> Result<Value> {
    let rows = (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| number(m[(r, c)], "matrix entry"))
                .collect::<Result<Vec<_>>>()
                .map(Value::Array)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Value::Array(rows))
}

pub fn value_to_matrix(v: &Value, rows: usize, cols: usize, at: &str) -> Result<Mat> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Document(format!("{at}: expected an array of rows")))?;
    if arr.len() != rows {
        return Err(Error::Document(format!(
            "{at}: expected {rows} rows, found {}",
            arr.len()
        )));
    }
    let mut m = Mat::zeros(rows, cols);
    for (r, row) in arr.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Document(format!("{at}[{r}]: expected an array")))?;
        if row.len() != cols {
            return Err(Error::Document(format!(
                "{at}[{r}]: expected {cols} entries, found {}",
                row.len()
            )));
        }
        for (c, x) in row.iter().enumerate() {
            m[(r, c)] = x
                .as_f64()
                .ok_or_else(|| Error::Document(format!("{at}[{r}][{c}]: expected a number")))?;
        }
    }
    Ok(m)
}

fn f64_array(values: &[f64], what: &str) -> Result<Value> {
    values
        .iter()
        .map(|&x| number(x, what))
        .collect::<Result<Vec<_>>>()
        .map(Value::Array)
}

fn parse_object(bytes: &[u8], schema: &str) -> Result<Map<String, Value>> {
    let v: Value = serde_json::from_slice(bytes)?;
    let obj = match v {
        Value::Object(o) => o,
        _ => return Err(Error::Document("top level must be an object".into())),
    };
    match obj.get("schema_version") {
        Some(Value::String(s)) if s == schema => Ok(obj),
        Some(Value::String(s)) => Err(Error::Document(format!(
            "unsupported schema_version '{s}' (expected '{schema}')"
        ))),
        Some(_) => Err(Error::Document("schema_version must be a string".into())),
        None => Err(Error::Document("missing schema_version".into())),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Document(format!("missing field '{key}'")))
}

fn usize_field(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    field(obj, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Document(format!("'{key}' must be a nonnegative integer")))
}

fn times_field(obj: &Map<String, Value>) -> Result<Vec<f64>> {
    let arr = field(obj, "times")?
        .as_array()
        .ok_or_else(|| Error::Document("'times' must be an array".into()))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| Error::Document(format!("times[{i}]: expected a number")))
        })
        .collect()
}

fn metadata_field(obj: &Map<String, Value>) -> Result<Metadata> {
    match obj.get("metadata") {
        None => Ok(Metadata::new()),
        Some(Value::Object(m)) => Ok(m.clone()),
        Some(_) => Err(Error::Document("'metadata' must be an object".into())),
    }
}

fn matrices_field(obj: &Map<String, Value>, key: &str, rows: usize, cols: usize) -> Result<Vec<Mat>> {
    let arr = field(obj, key)?
        .as_array()
        .ok_or_else(|| Error::Document(format!("'{key}' must be an array")))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| value_to_matrix(v, rows, cols, &format!("{key}[{i}]")))
        .collect()
}

/// Serialize a value canonically, with a trailing newline.
pub fn to_canonical_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec(v).expect("values built from finite numbers serialize");
    out.push(b'\n');
    out
}

fn document(schema: &str, fields: Vec<(&str, Value)>, metadata: &Metadata) -> Value {
    let mut obj = Map::new();
    obj.insert("schema_version".into(), Value::String(schema.into()));
    obj.insert("metadata".into(), Value::Object(metadata.clone()));
    for (k, v) in fields {
        obj.insert(k.into(), v);
    }
    Value::Object(obj)
}

pub fn matrix_document(m: &SymplecticMatrix, metadata: &Metadata) -> Result<Value> {
    Ok(document(
        MATRIX_SCHEMA,
        vec![
            ("half_dim", Value::from(m.half_dim())),
            ("entries", matrix_to_value(m.entries())?),
        ],
        metadata,
    ))
}

pub fn write_matrix(m: &SymplecticMatrix, metadata: &Metadata) -> Result<Vec<u8>> {
    Ok(to_canonical_bytes(&matrix_document(m, metadata)?))
}

pub fn read_matrix(bytes: &[u8]) -> Result<(SymplecticMatrix, Metadata)> {
    read_matrix_with(bytes, LOAD_TOLERANCE)
}

pub fn read_matrix_with(bytes: &[u8], tol: f64) -> Result<(SymplecticMatrix, Metadata)> {
    let obj = parse_object(bytes, MATRIX_SCHEMA)?;
    let n = usize_field(&obj, "half_dim")?;
    if n == 0 {
        return Err(Error::Document("half_dim must be at least 1".into()));
    }
    let m = value_to_matrix(field(&obj, "entries")?, 2 * n, 2 * n, "entries")?;
    let m = validate_symplectic(m, tol)?;
    Ok((m, metadata_field(&obj)?))
}

pub fn path_document(path: &SymplecticPath, metadata: &Metadata) -> Result<Value> {
    let frames = path.frames().iter().map(matrix_to_value).collect::<Result<Vec<_>>>()?;
    Ok(document(
        PATH_SCHEMA,
        vec![
            ("half_dim", Value::from(path.half_dim())),
            ("times", f64_array(path.times(), "time")?),
            ("frames", Value::Array(frames)),
        ],
        metadata,
    ))
}

pub fn write_path(path: &SymplecticPath, metadata: &Metadata) -> Result<Vec<u8>> {
    Ok(to_canonical_bytes(&path_document(path, metadata)?))
}

pub fn read_path(bytes: &[u8]) -> Result<(SymplecticPath, Metadata)> {
    read_path_with(bytes, LOAD_TOLERANCE)
}

pub fn read_path_with(bytes: &[u8], tol: f64) -> Result<(SymplecticPath, Metadata)> {
    let obj = parse_object(bytes, PATH_SCHEMA)?;
    let n = usize_field(&obj, "half_dim")?;
    if n == 0 {
        return Err(Error::Document("half_dim must be at least 1".into()));
    }
    let times = times_field(&obj)?;
    let frames = matrices_field(&obj, "frames", 2 * n, 2 * n)?;
    let path = SymplecticPath::new(n, times, frames, tol)?;
    Ok((path, metadata_field(&obj)?))
}

pub fn loop_document(lp: &CoisotropicLoop, metadata: &Metadata) -> Result<Value> {
    let subspaces = lp
        .subspaces()
        .iter()
        .map(|s| matrix_to_value(s.basis()))
        .collect::<Result<Vec<_>>>()?;
    Ok(document(
        LOOP_SCHEMA,
        vec![
            ("half_dim", Value::from(lp.half_dim())),
            ("codim", Value::from(lp.codim())),
            ("oriented", Value::Bool(lp.oriented())),
            ("times", f64_array(lp.times(), "time")?),
            ("subspaces", Value::Array(subspaces)),
        ],
        metadata,
    ))
}

pub fn write_loop(lp: &CoisotropicLoop, metadata: &Metadata) -> Result<Vec<u8>> {
    Ok(to_canonical_bytes(&loop_document(lp, metadata)?))
}

pub fn read_loop(bytes: &[u8]) -> Result<(CoisotropicLoop, Metadata)> {
    read_loop_with(bytes, Tolerances::default())
}

pub fn read_loop_with(bytes: &[u8], tol: Tolerances) -> Result<(CoisotropicLoop, Metadata)> {
    let obj = parse_object(bytes, LOOP_SCHEMA)?;
    let n = usize_field(&obj, "half_dim")?;
    let k = usize_field(&obj, "codim")?;
    if n == 0 || k > n {
        return Err(Error::Document(format!("codim {k} is not in 0..={n}")));
    }
    let oriented = match obj.get("oriented") {
        Some(Value::Bool(b)) => Some(*b),
        None => None,
        Some(_) => return Err(Error::Document("'oriented' must be a boolean".into())),
    };
    let times = times_field(&obj)?;
    let bases = matrices_field(&obj, "subspaces", 2 * n, 2 * n - k)?;
    let subspaces = bases
        .into_iter()
        .enumerate()
        .map(|(i, b)| Subspace::new(n, b, tol.rank).map_err(|e| Error::Document(format!("subspaces[{i}]: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let lp = CoisotropicLoop::new(n, k, times, subspaces, oriented, tol)?;
    Ok((lp, metadata_field(&obj)?))
}

pub fn holonomy_document(h: &HolonomyPath, metadata: &Metadata) -> Result<Value> {
    let maps = h.maps().iter().map(matrix_to_value).collect::<Result<Vec<_>>>()?;
    Ok(document(
        HOLONOMY_SCHEMA,
        vec![
            ("quotient_half_dim", Value::from(h.quotient_half_dim())),
            ("times", f64_array(h.times(), "time")?),
            ("maps", Value::Array(maps)),
        ],
        metadata,
    ))
}

pub fn write_holonomy(h: &HolonomyPath, metadata: &Metadata) -> Result<Vec<u8>> {
    Ok(to_canonical_bytes(&holonomy_document(h, metadata)?))
}

pub fn read_holonomy(bytes: &[u8]) -> Result<(HolonomyPath, Metadata)> {
    read_holonomy_with(bytes, LOAD_TOLERANCE)
}

pub fn read_holonomy_with(bytes: &[u8], tol: f64) -> Result<(HolonomyPath, Metadata)> {
    let obj = parse_object(bytes, HOLONOMY_SCHEMA)?;
    let m = usize_field(&obj, "quotient_half_dim")?;
    let times = times_field(&obj)?;
    let maps = matrices_field(&obj, "maps", 2 * m, 2 * m)?;
    let h = HolonomyPath::new(m, times, maps, tol)?;
    Ok((h, metadata_field(&obj)?))
}

pub fn report_to_value(r: &IndexReport) -> Result<Value> {
    let mut obj = Map::new();
    obj.insert("schema_version".into(), Value::String(REPORT_SCHEMA.into()));
    let value = match r.value {
        IndexValue::Real(x) => number(x + 0.0, "index value")?,
        IndexValue::Integer(k) => Value::from(k),
    };
    obj.insert("value".into(), value);
    obj.insert("max_phase_step".into(), number(r.max_phase_step, "max_phase_step")?);
    obj.insert("refinement_depth".into(), Value::from(r.refinement_depth));
    if let Some(res) = r.oracle_residual {
        obj.insert("oracle_residual".into(), number(res, "oracle_residual")?);
    }
    Ok(Value::Object(obj))
}

pub fn write_report(r: &IndexReport) -> Result<Vec<u8>> {
    Ok(to_canonical_bytes(&report_to_value(r)?))
}

pub fn read_report(bytes: &[u8]) -> Result<IndexReport> {
    let obj = parse_object(bytes, REPORT_SCHEMA)?;
    let value = match field(&obj, "value")? {
        Value::Number(x) if x.is_i64() => IndexValue::Integer(x.as_i64().unwrap()),
        Value::Number(x) => IndexValue::Real(x.as_f64().unwrap()),
        _ => return Err(Error::Document("'value' must be a number".into())),
    };
    let max_phase_step = field(&obj, "max_phase_step")?
        .as_f64()
        .ok_or_else(|| Error::Document("'max_phase_step' must be a number".into()))?;
    let refinement_depth = usize_field(&obj, "refinement_depth")?;
    let oracle_residual = match obj.get("oracle_residual") {
        None => None,
        Some(v) => Some(
            v.as_f64()
                .ok_or_else(|| Error::Document("'oracle_residual' must be a number".into()))?,
        ),
    };
    Ok(IndexReport {
        value,
        max_phase_step,
        refinement_depth,
        oracle_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{ellipsoid_path, EllipsoidSpec};
    use crate::indices::mean_index;

    #[test]
    fn identity_path_document() {
        let p = SymplecticPath::new(1, vec![0.0, 1.0], vec![Mat::identity(2, 2); 2], 1e-9).unwrap();
        let bytes = write_path(&p, &Metadata::new()).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(
            text,
            "{\"frames\":[[[1.0,0.0],[0.0,1.0]],[[1.0,0.0],[0.0,1.0]]],\"half_dim\":1,\
             \"metadata\":{},\"schema_version\":\"symplectic-path/1\",\"times\":[0.0,1.0]}\n"
        );
        let (back, _) = read_path(&bytes).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn ellipsoid_round_trip() {
        let spec = EllipsoidSpec::new(vec![1.0, 2.0, 3.0], 1).unwrap();
        let p = ellipsoid_path(&spec, 512, 1).unwrap();
        let mut meta = Metadata::new();
        meta.insert("generator".into(), Value::String("ellipsoid".into()));
        let bytes = write_path(&p, &meta).unwrap();
        let (back, meta_back) = read_path(&bytes).unwrap();
        assert_eq!(back, p);
        assert_eq!(meta_back, meta);
        assert_eq!(write_path(&back, &meta_back).unwrap(), bytes);
        assert!((mean_index(&back).unwrap().value() + 12.0).abs() < 1e-6);
    }

    #[test]
    fn rejections_name_the_problem() {
        let bad_times = br#"{"schema_version":"symplectic-path/1","half_dim":1,"times":[0.0,0.7,0.5,1.0],
            "frames":[[[1,0],[0,1]],[[1,0],[0,1]],[[1,0],[0,1]],[[1,0],[0,1]]]}"#;
        let e = read_path(bad_times).unwrap_err();
        assert_eq!(
            e.to_string(),
            "document rejected: times not strictly increasing at index 2"
        );

        let bad_frame = br#"{"schema_version":"symplectic-path/1","half_dim":1,"times":[0.0,1.0],
            "frames":[[[1,0],[0,1]],[[2,0],[0,2]]]}"#;
        let e = read_path(bad_frame).unwrap_err();
        assert!(e.to_string().contains("frame 1 is not symplectic: residual 3e0"), "{e}");

        let future = br#"{"schema_version":"symplectic-path/2","half_dim":1,"times":[0.0,1.0],"frames":[]}"#;
        assert!(read_path(future)
            .unwrap_err()
            .to_string()
            .contains("unsupported schema_version"));

        assert!(matches!(read_path(b"{not json"), Err(Error::Document(_))));
        let missing = br#"{"half_dim":1}"#;
        assert!(read_path(missing)
            .unwrap_err()
            .to_string()
            .contains("missing schema_version"));
    }

    #[test]
    fn report_round_trip() {
        let r = IndexReport {
            value: IndexValue::Integer(3),
            max_phase_step: 0.125,
            refinement_depth: 2,
            oracle_residual: Some(1e-13),
        };
        let bytes = write_report(&r).unwrap();
        assert_eq!(read_report(&bytes).unwrap(), r);
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("\"value\":3}"));
    }
}
