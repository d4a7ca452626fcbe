//! File formats: `.cube` LUTs, PNG/PPM images, token files, and
//! LUT-library manifests.

mod cube;
mod image;
mod manifest;
mod tokens;

pub use cube::{parse_cube, write_cube, write_cube_to, ParsedCube};
pub use image::{read_image, write_image};
pub use manifest::{read_manifest, read_manifest_file, write_manifest, LibraryEntry, SourceTag};
pub use tokens::{read_tokens, write_tokens, TokenFileRecord, TOKEN_COUNT};
