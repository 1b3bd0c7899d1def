//! Little-endian array serialization shared by the index file formats.
//!
//! Every file starts with a 4-byte magic and a `u32` version. Arrays are
//! written as a `u64` length followed by the raw little-endian elements.

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

pub fn write_header<W: Write>(w: &mut W, magic: &[u8; 4], version: u32) -> Result<()> {
    w.write_all(magic)?;
    w.write_u32::<LE>(version)?;
    Ok(())
}

pub fn read_header<R: Read>(r: &mut R, magic: &[u8; 4], version: u32) -> Result<()> {
    let mut got = [0u8; 4];
    r.read_exact(&mut got)?;
    if &got != magic {
        return Err(Error::BadIndex(format!(
            "expected magic {:?}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&got)
        )));
    }
    let v = r.read_u32::<LE>()?;
    if v != version {
        return Err(Error::BadIndex(format!(
            "unsupported version {v} (expected {version})"
        )));
    }
    Ok(())
}

pub fn write_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_u64::<LE>(v)?;
    Ok(())
}

pub fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(r.read_u64::<LE>()?)
}

pub fn read_len<R: Read>(r: &mut R) -> Result<usize> {
    let n = r.read_u64::<LE>()?;
    usize::try_from(n).map_err(|_| Error::BadIndex(format!("length {n} overflows usize")))
}

pub fn write_u8s<W: Write>(w: &mut W, xs: &[u8]) -> Result<()> {
    w.write_u64::<LE>(xs.len() as u64)?;
    w.write_all(xs)?;
    Ok(())
}

pub fn read_u8s<R: Read>(r: &mut R) -> Result<Vec<u8>> {
    let n = read_len(r)?;
    let mut v = vec![0u8; n];
    r.read_exact(&mut v)?;
    Ok(v)
}

macro_rules! array_io {
    ($write:ident, $read:ident, $t:ty, $w_one:ident, $r_many:ident) => {
        pub fn $write<W: Write>(w: &mut W, xs: &[$t]) -> Result<()> {
            w.write_u64::<LE>(xs.len() as u64)?;
            for &x in xs {
                w.$w_one::<LE>(x)?;
            }
            Ok(())
        }

        pub fn $read<R: Read>(r: &mut R) -> Result<Vec<$t>> {
            let n = read_len(r)?;
            let mut v = vec![<$t>::default(); n];
            r.$r_many::<LE>(&mut v)?;
            Ok(v)
        }
    };
}

array_io!(write_u16s, read_u16s, u16, write_u16, read_u16_into);
array_io!(write_u32s, read_u32s, u32, write_u32, read_u32_into);
array_io!(write_u64s, read_u64s, u64, write_u64, read_u64_into);
array_io!(write_f32s, read_f32s, f32, write_f32, read_f32_into);
array_io!(write_f64s, read_f64s, f64, write_f64, read_f64_into);
