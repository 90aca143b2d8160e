use std::collections::HashMap;
use std::net::IpAddr;
use std::path::Path;

use ipnet::IpNet;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Offline prefix → ASN table with longest-prefix-match lookup.
///
/// Prefixes are bucketed by (family, length); a lookup masks the address at
/// each populated length from longest to shortest and returns the first hit.
#[derive(Debug, Clone, Default)]
pub struct AsnTable {
    v4: Buckets,
    v6: Buckets,
    len: usize,
}

#[derive(Debug, Clone, Default)]
struct Buckets {
    by_len: HashMap<u8, HashMap<u128, u32>>,
    /// Populated prefix lengths, longest first.
    lengths: Vec<u8>,
}

impl Buckets {
    /// Returns the ASN already stored for this prefix, leaving it unchanged.
    fn insert(&mut self, bits: u128, len: u8, asn: u32) -> Option<u32> {
        let bucket = self.by_len.entry(len).or_default();
        if !self.lengths.contains(&len) {
            self.lengths.push(len);
            self.lengths.sort_unstable_by(|a, b| b.cmp(a));
        }
        match bucket.get(&bits) {
            Some(&prev) => Some(prev),
            None => {
                bucket.insert(bits, asn);
                None
            }
        }
    }

    fn lookup(&self, bits: u128) -> Option<u32> {
        self.lengths
            .iter()
            .find_map(|&len| self.by_len[&len].get(&mask(bits, len)).copied())
    }
}

/// Keeps the top `len` bits; addresses are left-aligned in 128 bits.
fn mask(bits: u128, len: u8) -> u128 {
    if len == 0 {
        0
    } else {
        bits & (u128::MAX << (128 - len as u32))
    }
}

fn left_aligned(addr: IpAddr) -> (u128, bool) {
    match addr {
        IpAddr::V4(a) => ((u32::from(a) as u128) << 96, true),
        IpAddr::V6(a) => (u128::from(a), false),
    }
}

impl AsnTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a prefix. Re-adding the same prefix with a different ASN is an error.
    pub fn insert(&mut self, prefix: IpNet, asn: u32) -> Result<()> {
        let prefix = prefix.trunc();
        let (bits, v4) = left_aligned(prefix.addr());
        let len = prefix.prefix_len();
        let buckets = if v4 { &mut self.v4 } else { &mut self.v6 };
        match buckets.insert(bits, len, asn) {
            Some(prev) if prev != asn => Err(Error::Argument(format!(
                "prefix {prefix} mapped to both AS{prev} and AS{asn}"
            ))),
            Some(_) => Ok(()),
            None => {
                self.len += 1;
                Ok(())
            }
        }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (IpNet, u32)>) -> Result<Self> {
        let mut t = AsnTable::new();
        for (p, asn) in entries {
            t.insert(p, asn)?;
        }
        Ok(t)
    }

    /// Number of distinct prefixes.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn lookup(&self, addr: IpAddr) -> Option<u32> {
        let (bits, v4) = left_aligned(addr);
        if v4 {
            self.v4.lookup(bits)
        } else {
            self.v6.lookup(bits)
        }
    }
}

#[derive(Deserialize)]
struct AsnRow {
    prefix: String,
    asn: u32,
}

/// Reads `prefix,asn`.
pub fn load_asn_table(path: impl AsRef<Path>) -> Result<AsnTable> {
    let path = path.as_ref();
    let file = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(&file, "open", e.to_string()))?;
    let mut table = AsnTable::new();
    for (i, row) in rdr.deserialize::<AsnRow>().enumerate() {
        let loc = format!("row {}", i + 2);
        let row = row.map_err(|e| Error::parse(&file, &loc, e.to_string()))?;
        let net: IpNet = row
            .prefix
            .parse()
            .map_err(|_| Error::parse(&file, &loc, format!("invalid prefix `{}`", row.prefix)))?;
        table
            .insert(net, row.asn)
            .map_err(|e| Error::parse(&file, &loc, e.to_string()))?;
    }
    Ok(table)
}

/// Private, shared (CGNAT), loopback, link-local and unspecified addresses.
pub fn is_non_routable(addr: IpAddr) -> bool {
    match addr {
        IpAddr::V4(a) => {
            let o = a.octets();
            a.is_private()
                || a.is_loopback()
                || a.is_link_local()
                || a.is_unspecified()
                || a.is_broadcast()
                || (o[0] == 100 && (o[1] & 0xc0) == 64)
        }
        IpAddr::V6(a) => {
            let seg0 = a.segments()[0];
            a.is_loopback() || a.is_unspecified() || (seg0 & 0xfe00) == 0xfc00 || (seg0 & 0xffc0) == 0xfe80
        }
    }
}
