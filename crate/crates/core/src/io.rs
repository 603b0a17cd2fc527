//! The JSON quadrilateral file format.

use serde::{Deserialize, Serialize};

use crate::corpus::Instance;
use crate::error::InputError;
use crate::geometry::{Point, PolygonalQuadrilateral};

/// `{"vertices": [[x, y], ...], "quad_vertices": [i1, i2, i3, i4], "sampled"?: true}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadFile {
    pub vertices: Vec<Point>,
    pub quad_vertices: [usize; 4],
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sampled: bool,
}

impl QuadFile {
    pub fn parse(text: &str) -> Result<QuadFile, InputError> {
        serde_json::from_str(text).map_err(|e| InputError::Parse(e.to_string()))
    }

    pub fn from_quad(q: &PolygonalQuadrilateral, sampled: bool) -> QuadFile {
        QuadFile {
            vertices: q.vertices().to_vec(),
            quad_vertices: q.quad_indices(),
            sampled,
        }
    }

    pub fn to_quad(&self) -> Result<PolygonalQuadrilateral, InputError> {
        Ok(PolygonalQuadrilateral::new(self.vertices.clone(), self.quad_vertices)?)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("quad file serializes");
        s.push('\n');
        s
    }
}

impl From<&Instance> for QuadFile {
    fn from(inst: &Instance) -> Self {
        QuadFile::from_quad(&inst.quad, inst.sampled)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn round_trip() {
        let f = QuadFile::from_quad(&corpus::l_hexagon(), false);
        let text = f.to_json();
        assert!(!text.contains("sampled"));
        let g = QuadFile::parse(&text).unwrap();
        assert_eq!(g.to_quad().unwrap(), corpus::l_hexagon());
        let s = QuadFile::parse(r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "quad_vertices": [0,1,2,3], "sampled": true}"#);
        assert!(s.unwrap().sampled);
    }

    #[test]
    fn bad_input() {
        assert!(matches!(QuadFile::parse("{"), Err(InputError::Parse(_))));
        let bowtie = QuadFile::parse(r#"{"vertices": [[0,0],[1,1],[1,0],[0,1]], "quad_vertices": [0,1,2,3]}"#).unwrap();
        assert!(matches!(bowtie.to_quad(), Err(InputError::Geometry(_))));
    }
}
