use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::GeoPoint;
use crate::error::{Error, Result};

/// A closed ring: first point equals last, at least four points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ring(Vec<GeoPoint>);

impl Ring {
    pub fn new(points: Vec<GeoPoint>, unit: &str) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::MalformedRing {
                unit: unit.to_string(),
                reason: format!("{} points, need at least 4", points.len()),
            });
        }
        if points.first() != points.last() {
            return Err(Error::MalformedRing {
                unit: unit.to_string(),
                reason: "ring is not closed".into(),
            });
        }
        Ok(Ring(points))
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.0
    }

    fn edges(&self) -> impl Iterator<Item = (GeoPoint, GeoPoint)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    fn on_boundary(&self, p: GeoPoint) -> bool {
        self.edges().any(|(a, b)| on_segment(p, a, b))
    }

    /// Even-odd ray casting along +lon. Boundary handling is left to the caller.
    fn crossings_odd(&self, p: GeoPoint) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.lat > p.lat) != (b.lat > p.lat) {
                let lon_at = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
                if p.lon < lon_at {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Inside or on the boundary.
    fn contains_closed(&self, p: GeoPoint) -> bool {
        self.on_boundary(p) || self.crossings_odd(p)
    }

    /// Strictly inside.
    fn contains_open(&self, p: GeoPoint) -> bool {
        !self.on_boundary(p) && self.crossings_odd(p)
    }

    pub(crate) fn bbox(&self) -> BBox {
        BBox::of(self.0.iter().copied())
    }

    /// Shoelace signed area and area-weighted centroid moments in (lon, lat).
    pub(crate) fn area_moments(&self) -> (f64, f64, f64) {
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for (p, q) in self.edges() {
            let cross = p.lon * q.lat - q.lon * p.lat;
            a += cross;
            cx += (p.lon + q.lon) * cross;
            cy += (p.lat + q.lat) * cross;
        }
        (a / 2.0, cx / 6.0, cy / 6.0)
    }
}

fn on_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> bool {
    let cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    cross == 0.0
        && p.lon >= a.lon.min(b.lon)
        && p.lon <= a.lon.max(b.lon)
        && p.lat >= a.lat.min(b.lat)
        && p.lat <= a.lat.max(b.lat)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BBox {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl BBox {
    fn of(points: impl Iterator<Item = GeoPoint>) -> Self {
        let mut b = BBox {
            min_lat: f64::INFINITY,
            max_lat: f64::NEG_INFINITY,
            min_lon: f64::INFINITY,
            max_lon: f64::NEG_INFINITY,
        };
        for p in points {
            b.min_lat = b.min_lat.min(p.lat);
            b.max_lat = b.max_lat.max(p.lat);
            b.min_lon = b.min_lon.min(p.lon);
            b.max_lon = b.max_lon.max(p.lon);
        }
        b
    }

    pub fn union(self, other: BBox) -> BBox {
        BBox {
            min_lat: self.min_lat.min(other.min_lat),
            max_lat: self.max_lat.max(other.max_lat),
            min_lon: self.min_lon.min(other.min_lon),
            max_lon: self.max_lon.max(other.max_lon),
        }
    }
}

/// Exterior ring plus optional holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub exterior: Ring,
    pub holes: Vec<Ring>,
}

impl Polygon {
    pub fn contains(&self, p: GeoPoint) -> bool {
        self.exterior.contains_closed(p) && !self.holes.iter().any(|h| h.contains_open(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdminUnit {
    pub id: String,
    pub name: String,
    pub country: String,
    pub continent: String,
    pub boundary: Vec<Polygon>,
    pub population: f64,
    pub wealth: Option<f64>,
    pub rep_point: Option<GeoPoint>,
}

impl AdminUnit {
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        country: impl Into<String>,
        continent: impl Into<String>,
        boundary: Vec<Polygon>,
    ) -> Result<Self> {
        let id = id.into();
        if boundary.is_empty() {
            return Err(Error::MalformedRing {
                unit: id,
                reason: "unit has no polygons".into(),
            });
        }
        Ok(AdminUnit {
            id,
            name: name.into(),
            country: country.into(),
            continent: continent.into(),
            boundary,
            population: 0.0,
            wealth: None,
            rep_point: None,
        })
    }

    /// Unit square-ish convenience used by fixtures: a single rectangle.
    pub fn rectangle(id: impl Into<String>, min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self> {
        let id = id.into();
        let pts = [
            (min_lat, min_lon),
            (min_lat, max_lon),
            (max_lat, max_lon),
            (max_lat, min_lon),
            (min_lat, min_lon),
        ]
        .iter()
        .map(|&(la, lo)| GeoPoint::new(la, lo))
        .collect::<Result<Vec<_>>>()?;
        let ring = Ring::new(pts, &id)?;
        AdminUnit::new(
            id.clone(),
            id,
            "",
            "",
            vec![Polygon {
                exterior: ring,
                holes: vec![],
            }],
        )
    }

    pub(crate) fn bbox(&self) -> BBox {
        self.boundary
            .iter()
            .map(|p| p.exterior.bbox())
            .reduce(BBox::union)
            .expect("unit has at least one polygon")
    }

    /// Area-weighted centroid of the polygons, holes subtracted.
    pub fn polygon_centroid(&self) -> GeoPoint {
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for poly in &self.boundary {
            let (ea, ex, ey) = poly.exterior.area_moments();
            let s = ea.signum();
            a += ea * s;
            cx += ex * s;
            cy += ey * s;
            for h in &poly.holes {
                let (ha, hx, hy) = h.area_moments();
                let s = ha.signum();
                a -= ha * s;
                cx -= hx * s;
                cy -= hy * s;
            }
        }
        if a.abs() < f64::EPSILON {
            // degenerate: mean of exterior vertices
            let pts: Vec<_> = self
                .boundary
                .iter()
                .flat_map(|p| p.exterior.points()[1..].iter().copied())
                .collect();
            let n = pts.len() as f64;
            return GeoPoint {
                lat: pts.iter().map(|p| p.lat).sum::<f64>() / n,
                lon: pts.iter().map(|p| p.lon).sum::<f64>() / n,
            };
        }
        GeoPoint {
            lat: cy / a,
            lon: cx / a,
        }
    }
}

/// True iff `p` is inside any polygon of the unit and not strictly inside one
/// of its holes. Points on a boundary count as inside.
pub fn point_in_region(p: GeoPoint, unit: &AdminUnit) -> bool {
    unit.boundary.iter().any(|poly| poly.contains(p))
}

/// Reads a GeoJSON FeatureCollection of Polygon/MultiPolygon features with
/// `id`, `name`, `country` and `continent` properties.
pub fn load_admin_units(path: impl AsRef<Path>) -> Result<Vec<AdminUnit>> {
    let path = path.as_ref();
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| Error::parse(&file, format!("line {}", e.line()), e.to_string()))?;
    parse_feature_collection(&doc, &file)
}

pub(crate) fn parse_feature_collection(doc: &Value, file: &str) -> Result<Vec<AdminUnit>> {
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::parse(file, "root", "expected a FeatureCollection"));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(file, "root", "missing `features` array"))?;

    let mut units = Vec::with_capacity(features.len());
    for (i, feat) in features.iter().enumerate() {
        let loc = format!("feature {i}");
        let props = feat
            .get("properties")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::parse(file, &loc, "missing properties"))?;
        let prop = |key: &str| -> Result<String> {
            match props.get(key) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(Value::Number(n)) => Ok(n.to_string()),
                _ => Err(Error::parse(file, &loc, format!("missing property `{key}`"))),
            }
        };
        let id = prop("id")?;
        let geometry = feat
            .get("geometry")
            .ok_or_else(|| Error::parse(file, &loc, "missing geometry"))?;
        let coords = geometry
            .get("coordinates")
            .ok_or_else(|| Error::parse(file, &loc, "missing coordinates"))?;
        let polygons = match geometry.get("type").and_then(Value::as_str) {
            Some("Polygon") => vec![parse_polygon(coords, file, &loc, &id)?],
            Some("MultiPolygon") => coords
                .as_array()
                .ok_or_else(|| Error::parse(file, &loc, "MultiPolygon coordinates not an array"))?
                .iter()
                .map(|c| parse_polygon(c, file, &loc, &id))
                .collect::<Result<_>>()?,
            other => return Err(Error::parse(file, &loc, format!("unsupported geometry type {other:?}"))),
        };
        units.push(AdminUnit::new(
            id,
            prop("name")?,
            prop("country")?,
            prop("continent")?,
            polygons,
        )?);
    }
    Ok(units)
}

fn parse_polygon(coords: &Value, file: &str, loc: &str, unit: &str) -> Result<Polygon> {
    let rings = coords
        .as_array()
        .ok_or_else(|| Error::parse(file, loc, "polygon coordinates not an array"))?;
    let mut parsed = rings
        .iter()
        .map(|r| parse_ring(r, file, loc, unit))
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    let exterior = parsed
        .next()
        .ok_or_else(|| Error::parse(file, loc, "polygon without rings"))?;
    Ok(Polygon {
        exterior,
        holes: parsed.collect(),
    })
}

fn parse_ring(ring: &Value, file: &str, loc: &str, unit: &str) -> Result<Ring> {
    let positions = ring
        .as_array()
        .ok_or_else(|| Error::parse(file, loc, "ring not an array"))?;
    let mut points = Vec::with_capacity(positions.len());
    for pos in positions {
        let pair = pos.as_array().filter(|a| a.len() >= 2);
        let (lon, lat) = match pair.map(|a| (a[0].as_f64(), a[1].as_f64())) {
            Some((Some(lon), Some(lat))) => (lon, lat),
            _ => return Err(Error::parse(file, loc, "invalid position")),
        };
        points.push(GeoPoint::new(lat, lon).map_err(|e| Error::parse(file, loc, e.to_string()))?);
    }
    Ring::new(points, unit)
}
