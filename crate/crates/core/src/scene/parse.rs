//! Line-oriented scene format.
//!
//! ```text
//! camera pos=(0,1,4) look=(0,1,0) up=(0,1,0) fov=40 res=64x64
//! material white lambertian albedo=(0.8,0.8,0.8)
//! quad corner=(-1,2,-1) e1=(2,0,0) e2=(0,0,2) material=white emit=lamp
//! arealight shape=lamp radiance=(10,10,10)
//! ```
//!
//! Values are scalars, `(x,y,z)` triples or strings (bare or double-quoted).
//! A shape's `emit=TAG` names it for exactly one `arealight shape=TAG`.
//! Colors accept a scalar as grey. Spotlight angles and camera fov are in
//! degrees. Spot textures are PFM paths or built-ins such as `@checker:8`.

use std::collections::HashMap;

use super::{Camera, Emitter, Material, MeshDecl, Primitive, Scene, Shape, SpotTexture};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::math::{Rgb, Vec3};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Eq,
    LParen,
    RParen,
    Comma,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

fn lex(line_no: usize, line: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '=' => {
                out.push((Tok::Eq, col));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, col));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, col));
                i += 1;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(perr(line_no, col, "unterminated string")),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                out.push((Tok::Quoted(s), col));
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !"=(),\"".contains(chars[i]) {
                    i += 1;
                }
                out.push((Tok::Word(chars[start..i].iter().collect()), col));
            }
        }
    }
    Ok(out)
}

fn is_decimal(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let digits = |i: &mut usize| {
        let s = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        *i > s
    };
    if !digits(&mut i) {
        return false;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        if !digits(&mut i) {
            return false;
        }
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        if !digits(&mut i) {
            return false;
        }
    }
    i == b.len()
}

fn parse_number(line: usize, col: usize, s: &str) -> Result<f64> {
    let lower = s.trim_start_matches(['+', '-']).to_ascii_lowercase();
    if lower == "inf" || lower == "infinity" || lower == "nan" {
        return Err(perr(line, col, format!("non-finite number '{s}'")));
    }
    if !is_decimal(s) {
        return Err(perr(line, col, format!("expected a number, found '{s}'")));
    }
    // Locale-independent: Rust's float parser only accepts '.' decimals.
    let v: f64 = s.parse().map_err(|_| perr(line, col, format!("invalid number '{s}'")))?;
    if !v.is_finite() {
        return Err(perr(line, col, format!("non-finite number '{s}'")));
    }
    Ok(v)
}

#[derive(Clone, Debug)]
enum Value {
    Scalar(String),
    Quoted(String),
    Triple([f64; 3]),
}

#[derive(Clone, Debug)]
struct Kv {
    value: Value,
    col: usize,
}

struct Stmt {
    line: usize,
    keyword: String,
    keyword_col: usize,
    words: Vec<(String, usize)>,
    kvs: HashMap<String, Kv>,
}

impl Stmt {
    fn take(&mut self, key: &str) -> Result<Kv> {
        self.kvs.remove(key).ok_or_else(|| {
            perr(self.line, self.keyword_col, format!("{}: missing '{key}='", self.keyword))
        })
    }

    fn take_opt(&mut self, key: &str) -> Option<Kv> {
        self.kvs.remove(key)
    }

    fn number(&mut self, key: &str) -> Result<(f64, usize)> {
        let kv = self.take(key)?;
        match kv.value {
            Value::Scalar(s) => Ok((parse_number(self.line, kv.col, &s)?, kv.col)),
            _ => Err(perr(self.line, kv.col, format!("'{key}' expects a number"))),
        }
    }

    fn vec3(&mut self, key: &str) -> Result<(Vec3, usize)> {
        let kv = self.take(key)?;
        match kv.value {
            Value::Triple([x, y, z]) => Ok((Vec3::new(x, y, z), kv.col)),
            _ => Err(perr(self.line, kv.col, format!("'{key}' expects (x,y,z)"))),
        }
    }

    fn color_kv(&self, key: &str, kv: Kv) -> Result<(Rgb, usize)> {
        match kv.value {
            Value::Triple([r, g, b]) => Ok((Rgb::new(r, g, b), kv.col)),
            Value::Scalar(s) => Ok((Rgb::grey(parse_number(self.line, kv.col, &s)?), kv.col)),
            Value::Quoted(_) => Err(perr(self.line, kv.col, format!("'{key}' expects a color"))),
        }
    }

    fn color(&mut self, key: &str) -> Result<(Rgb, usize)> {
        let kv = self.take(key)?;
        self.color_kv(key, kv)
    }

    fn string_kv(kv: Kv) -> Option<(String, usize)> {
        match kv.value {
            Value::Scalar(s) | Value::Quoted(s) => Some((s, kv.col)),
            Value::Triple(_) => None,
        }
    }

    fn string(&mut self, key: &str) -> Result<(String, usize)> {
        let kv = self.take(key)?;
        let col = kv.col;
        Self::string_kv(kv).ok_or_else(|| perr(self.line, col, format!("'{key}' expects a name")))
    }

    fn string_opt(&mut self, key: &str) -> Result<Option<(String, usize)>> {
        match self.take_opt(key) {
            None => Ok(None),
            Some(kv) => {
                let col = kv.col;
                Self::string_kv(kv)
                    .map(Some)
                    .ok_or_else(|| perr(self.line, col, format!("'{key}' expects a name")))
            }
        }
    }

    fn finish(&self) -> Result<()> {
        if let Some((k, kv)) = self.kvs.iter().min_by_key(|(_, kv)| kv.col) {
            return Err(perr(self.line, kv.col, format!("{}: unknown key '{k}'", self.keyword)));
        }
        Ok(())
    }
}

fn parse_stmt(line_no: usize, toks: Vec<(Tok, usize)>) -> Result<Stmt> {
    let mut it = toks.into_iter().peekable();
    let (keyword, keyword_col) = match it.next() {
        Some((Tok::Word(w), c)) => (w, c),
        Some((_, c)) => return Err(perr(line_no, c, "expected a keyword")),
        None => unreachable!("blank lines are skipped"),
    };
    let mut words = Vec::new();
    let mut kvs = HashMap::new();
    while let Some((tok, col)) = it.next() {
        let name = match tok {
            Tok::Word(w) | Tok::Quoted(w) => w,
            _ => return Err(perr(line_no, col, "unexpected punctuation")),
        };
        if !matches!(it.peek(), Some((Tok::Eq, _))) {
            if !kvs.is_empty() {
                return Err(perr(line_no, col, format!("expected '{name}=value'")));
            }
            words.push((name, col));
            continue;
        }
        it.next();
        let (vtok, vcol) = it.next().ok_or_else(|| perr(line_no, col, format!("missing value for '{name}'")))?;
        let value = match vtok {
            Tok::Word(w) => Value::Scalar(w),
            Tok::Quoted(s) => Value::Quoted(s),
            Tok::LParen => {
                let mut xs = [0.0; 3];
                for (k, x) in xs.iter_mut().enumerate() {
                    match it.next() {
                        Some((Tok::Word(w), c)) => *x = parse_number(line_no, c, &w)?,
                        Some((_, c)) => return Err(perr(line_no, c, "expected a number in triple")),
                        None => return Err(perr(line_no, vcol, "unterminated triple")),
                    }
                    let want = if k < 2 { Tok::Comma } else { Tok::RParen };
                    match it.next() {
                        Some((t, _)) if t == want => {}
                        Some((_, c)) => {
                            return Err(perr(line_no, c, if k < 2 { "expected ','" } else { "expected ')'" }))
                        }
                        None => return Err(perr(line_no, vcol, "unterminated triple")),
                    }
                }
                Value::Triple(xs)
            }
            _ => return Err(perr(line_no, vcol, format!("bad value for '{name}'"))),
        };
        if kvs.insert(name.clone(), Kv { value, col: vcol }).is_some() {
            return Err(perr(line_no, col, format!("duplicate key '{name}'")));
        }
    }
    Ok(Stmt { line: line_no, keyword, keyword_col, words, kvs })
}

fn check_unit_color(line: usize, (c, col): (Rgb, usize), what: &str) -> Result<Rgb> {
    for v in [c.r, c.g, c.b] {
        if !(0.0..=1.0).contains(&v) {
            return Err(perr(line, col, format!("{what} components must lie in [0,1]")));
        }
    }
    Ok(c)
}

fn check_nonneg_color(line: usize, (c, col): (Rgb, usize), what: &str) -> Result<Rgb> {
    if c.r < 0.0 || c.g < 0.0 || c.b < 0.0 {
        return Err(perr(line, col, format!("{what} must be non-negative")));
    }
    Ok(c)
}

/// Parses a scene, resolving `mesh obj=` and texture paths on the filesystem.
pub fn parse_scene(text: &str) -> Result<Scene> {
    parse_scene_with(text, &|p: &str| std::fs::read(p))
}

/// Parses a scene; `resolve` loads files referenced by `obj=` and `texture=`.
pub fn parse_scene_with(text: &str, resolve: &dyn Fn(&str) -> std::io::Result<Vec<u8>>) -> Result<Scene> {
    let mut camera: Option<(Camera, usize)> = None;
    let mut materials: Vec<(String, Material)> = Vec::new();
    let mut mat_index: HashMap<String, usize> = HashMap::new();
    let mut prims: Vec<Primitive> = Vec::new();
    let mut meshes: Vec<MeshDecl> = Vec::new();
    // tag -> (primitive, line, column)
    let mut tags: HashMap<String, (usize, usize, usize)> = HashMap::new();
    let mut tag_order: Vec<String> = Vec::new();
    enum PendingLight {
        Area { tag: String, radiance: Rgb, line: usize, col: usize },
        Ready(Emitter),
    }
    let mut lights: Vec<PendingLight> = Vec::new();
    let mut last_line = 0;

    let lookup_mat = |st: &mut Stmt, mat_index: &HashMap<String, usize>| -> Result<usize> {
        let (name, col) = st.string("material")?;
        mat_index
            .get(&name)
            .copied()
            .ok_or_else(|| perr(st.line, col, format!("dangling reference: unknown material '{name}'")))
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut st = parse_stmt(line_no, lex(line_no, raw)?)?;
        let kw = st.keyword.clone();
        let allowed_words = if kw == "material" { 2 } else { 0 };
        if st.words.len() > allowed_words {
            let (w, c) = &st.words[allowed_words];
            return Err(perr(line_no, *c, format!("{kw}: unexpected word '{w}'")));
        }
        match kw.as_str() {
            "camera" => {
                if camera.is_some() {
                    return Err(perr(line_no, st.keyword_col, "duplicate camera"));
                }
                let (pos, _) = st.vec3("pos")?;
                let (look, look_col) = st.vec3("look")?;
                let (up, up_col) = st.vec3("up")?;
                let (fov, fov_col) = st.number("fov")?;
                let (res, res_col) = st.string("res")?;
                let (w, h) = res
                    .split_once(['x', 'X'])
                    .and_then(|(a, b)| Some((a.parse::<u32>().ok()?, b.parse::<u32>().ok()?)))
                    .ok_or_else(|| perr(line_no, res_col, format!("res must be WxH, found '{res}'")))?;
                if w == 0 || h == 0 {
                    return Err(perr(line_no, res_col, "resolution must be at least 1x1"));
                }
                if !(fov > 0.0 && fov < 180.0) {
                    return Err(perr(line_no, fov_col, "fov must lie in (0,180)"));
                }
                st.finish()?;
                let cam = Camera::new(pos, look, up, fov, w, h).map_err(|e| {
                    let col = if (look - pos).length_sq() == 0.0 { look_col } else { up_col };
                    perr(line_no, col, e.to_string())
                })?;
                camera = Some((cam, line_no));
            }
            "material" => {
                if st.words.len() < 2 {
                    return Err(perr(line_no, st.keyword_col, "material needs NAME and a kind"));
                }
                let (name, name_col) = st.words[0].clone();
                let (kind, kind_col) = st.words[1].clone();
                let mat = match kind.as_str() {
                    "lambertian" => {
                        let c = st.color("albedo")?;
                        Material::Lambertian { albedo: check_unit_color(line_no, c, "albedo")? }
                    }
                    "mirror" => {
                        let c = st.color("refl")?;
                        Material::Mirror { reflectance: check_unit_color(line_no, c, "refl")? }
                    }
                    "dielectric" => {
                        let (ior, col) = st.number("ior")?;
                        if !(ior > 1.0) {
                            return Err(perr(line_no, col, "ior must exceed 1"));
                        }
                        let tint = match st.take_opt("tint") {
                            Some(kv) => {
                                let c = st.color_kv("tint", kv)?;
                                check_unit_color(line_no, c, "tint")?
                            }
                            None => Rgb::WHITE,
                        };
                        Material::Dielectric { ior, tint }
                    }
                    "phong" => {
                        let d = st.color("diffuse")?;
                        let s = st.color("specular")?;
                        let (exponent, ecol) = st.number("exp")?;
                        let diffuse = check_unit_color(line_no, d, "diffuse")?;
                        let specular = check_unit_color(line_no, s, "specular")?;
                        for c in 0..3 {
                            if diffuse.channel(c) + specular.channel(c) > 1.0 {
                                return Err(perr(line_no, s.1, "diffuse + specular must not exceed 1"));
                            }
                        }
                        if !(exponent >= 1.0) {
                            return Err(perr(line_no, ecol, "exp must be at least 1"));
                        }
                        Material::Phong { diffuse, specular, exponent }
                    }
                    _ => return Err(perr(line_no, kind_col, format!("unknown material kind '{kind}'"))),
                };
                st.finish()?;
                if mat_index.contains_key(&name) {
                    return Err(perr(line_no, name_col, format!("duplicate material '{name}'")));
                }
                mat_index.insert(name.clone(), materials.len());
                materials.push((name, mat));
            }
            "sphere" | "quad" => {
                let shape = if kw == "sphere" {
                    let (center, _) = st.vec3("center")?;
                    let (radius, rcol) = st.number("radius")?;
                    if !(radius > 0.0) {
                        return Err(perr(line_no, rcol, "sphere radius must be positive"));
                    }
                    Shape::Sphere { center, radius }
                } else {
                    let (corner, _) = st.vec3("corner")?;
                    let (e1, _) = st.vec3("e1")?;
                    let (e2, e2col) = st.vec3("e2")?;
                    if e1.cross(e2).length() <= 1e-12 * e1.length() * e2.length() || e1.length_sq() == 0.0 {
                        return Err(perr(line_no, e2col, "quad edges must be non-parallel and non-zero"));
                    }
                    Shape::Quad { corner, e1, e2 }
                };
                let material = lookup_mat(&mut st, &mat_index)?;
                let tag = st.string_opt("emit")?;
                st.finish()?;
                if let Some((t, col)) = &tag {
                    if tags.contains_key(t) {
                        return Err(perr(line_no, *col, format!("duplicate emit tag '{t}'")));
                    }
                    tags.insert(t.clone(), (prims.len(), line_no, *col));
                    tag_order.push(t.clone());
                }
                prims.push(Primitive { shape, material, emitter: None, tag: tag.map(|t| t.0) });
            }
            "mesh" => {
                let (obj, ocol) = st.string("obj")?;
                let material = lookup_mat(&mut st, &mat_index)?;
                st.finish()?;
                let bytes = resolve(&obj).map_err(|e| perr(line_no, ocol, format!("cannot read '{obj}': {e}")))?;
                let text = String::from_utf8(bytes).map_err(|_| perr(line_no, ocol, format!("'{obj}' is not UTF-8")))?;
                let tris = parse_obj(&text).map_err(|e| perr(line_no, ocol, format!("in '{obj}': {e}")))?;
                meshes.push(MeshDecl { obj, material, first: prims.len(), count: tris.len() });
                for shape in tris {
                    prims.push(Primitive { shape, material, emitter: None, tag: None });
                }
            }
            "arealight" => {
                let (tag, col) = st.string("shape")?;
                let (radiance, rcol) = st.color("radiance")?;
                let radiance = check_nonneg_color(line_no, (radiance, rcol), "radiance")?;
                st.finish()?;
                lights.push(PendingLight::Area { tag, radiance, line: line_no, col });
            }
            "pointlight" => {
                let (pos, _) = st.vec3("pos")?;
                let c = st.color("intensity")?;
                let intensity = check_nonneg_color(line_no, c, "intensity")?;
                st.finish()?;
                lights.push(PendingLight::Ready(Emitter::Point { pos, intensity }));
            }
            "spotlight" => {
                let (pos, _) = st.vec3("pos")?;
                let (dir, dcol) = st.vec3("dir")?;
                let (angle, acol) = st.number("angle")?;
                let c = st.color("intensity")?;
                let intensity = check_nonneg_color(line_no, c, "intensity")?;
                let texture = match st.string_opt("texture")? {
                    None => None,
                    Some((src, tcol)) => Some(load_texture(&src, resolve).map_err(|e| perr(line_no, tcol, e))?),
                };
                st.finish()?;
                if dir.length_sq() == 0.0 {
                    return Err(perr(line_no, dcol, "spot direction must be non-zero"));
                }
                if !(angle > 0.0 && angle <= 90.0) {
                    return Err(perr(line_no, acol, "spot angle must lie in (0,90] degrees"));
                }
                let dir = dir.normalized();
                lights.push(PendingLight::Ready(Emitter::Spot {
                    pos,
                    dir,
                    angle_deg: angle,
                    intensity,
                    texture,
                    frame: Emitter::spot_frame(dir),
                }));
            }
            other => return Err(perr(line_no, st.keyword_col, format!("unknown keyword '{other}'"))),
        }
    }

    let (camera, _) = camera.ok_or_else(|| perr(last_line.max(1), 1, "scene has no camera"))?;
    let mut emitters = Vec::with_capacity(lights.len());
    let mut claimed: HashMap<String, usize> = HashMap::new();
    for l in lights {
        match l {
            PendingLight::Ready(e) => emitters.push(e),
            PendingLight::Area { tag, radiance, line, col } => {
                let &(prim, _, _) = tags
                    .get(&tag)
                    .ok_or_else(|| perr(line, col, format!("dangling reference: no shape tagged '{tag}'")))?;
                if claimed.insert(tag.clone(), line).is_some() {
                    return Err(perr(line, col, format!("shape '{tag}' already has an arealight")));
                }
                prims[prim].emitter = Some(emitters.len());
                emitters.push(Emitter::Area { prim, radiance, name: tag });
            }
        }
    }
    for t in &tag_order {
        if !claimed.contains_key(t) {
            let (_, line, col) = tags[t];
            return Err(perr(line, col, format!("dangling reference: emit tag '{t}' has no arealight")));
        }
    }
    Ok(Scene::new(camera, materials, prims, emitters, meshes))
}

fn load_texture(src: &str, resolve: &dyn Fn(&str) -> std::io::Result<Vec<u8>>) -> std::result::Result<SpotTexture, String> {
    if src.starts_with('@') {
        return SpotTexture::builtin(src).map_err(|e| e.to_string());
    }
    let bytes = resolve(src).map_err(|e| format!("cannot read texture '{src}': {e}"))?;
    let img = Image::decode_pfm(&bytes).map_err(|e| format!("texture '{src}': {e}"))?;
    let texels = img.pixels.iter().map(|p| Rgb::new(p[0] as f64, p[1] as f64, p[2] as f64)).collect();
    Ok(SpotTexture { source: src.to_string(), width: img.width, height: img.height, texels })
}

/// Triangles from the `v`/`vn`/`f` subset of Wavefront OBJ. Polygons are
/// fan-triangulated; negative indices count from the end.
pub fn parse_obj(text: &str) -> std::result::Result<Vec<Shape>, String> {
    let mut v: Vec<Vec3> = Vec::new();
    let mut vn: Vec<Vec3> = Vec::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let mut parts = line.split_whitespace();
        let Some(head) = parts.next() else { continue };
        let nums = |parts: std::str::SplitWhitespace| -> std::result::Result<Vec3, String> {
            let xs: Vec<f64> = parts
                .take(3)
                .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| format!("line {ln}: bad number"))?;
            if xs.len() != 3 {
                return Err(format!("line {ln}: expected 3 numbers"));
            }
            Ok(Vec3::new(xs[0], xs[1], xs[2]))
        };
        match head {
            "v" => v.push(nums(parts)?),
            "vn" => vn.push(nums(parts)?.normalized()),
            "f" => {
                let resolve_idx = |s: &str, len: usize| -> std::result::Result<usize, String> {
                    let k: i64 = s.parse().map_err(|_| format!("line {ln}: bad index '{s}'"))?;
                    let idx = if k > 0 { k - 1 } else { len as i64 + k };
                    if idx < 0 || idx >= len as i64 {
                        return Err(format!("line {ln}: index {k} out of range"));
                    }
                    Ok(idx as usize)
                };
                let mut corners = Vec::new();
                for c in parts {
                    let mut f = c.split('/');
                    let pi = resolve_idx(f.next().unwrap_or(""), v.len())?;
                    let _tex = f.next();
                    let ni = match f.next() {
                        Some(s) if !s.is_empty() => Some(resolve_idx(s, vn.len())?),
                        _ => None,
                    };
                    corners.push((pi, ni));
                }
                if corners.len() < 3 {
                    return Err(format!("line {ln}: face needs at least 3 vertices"));
                }
                for k in 1..corners.len() - 1 {
                    let tri = [corners[0], corners[k], corners[k + 1]];
                    let p = [v[tri[0].0], v[tri[1].0], v[tri[2].0]];
                    let n = match (tri[0].1, tri[1].1, tri[2].1) {
                        (Some(a), Some(b), Some(c)) => Some([vn[a], vn[b], vn[c]]),
                        _ => None,
                    };
                    out.push(Shape::Triangle { p, n });
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Shortest roundtrip form; never produces `inf` or `NaN` for parsed scenes.
fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_vec(v: Vec3) -> String {
    format!("({},{},{})", fmt_num(v.x), fmt_num(v.y), fmt_num(v.z))
}

fn fmt_rgb(c: Rgb) -> String {
    format!("({},{},{})", fmt_num(c.r), fmt_num(c.g), fmt_num(c.b))
}

fn fmt_str(s: &str) -> String {
    let bare = !s.is_empty()
        && s.chars().all(|c| !c.is_whitespace() && !"=(),\"#".contains(c))
        && !is_decimal(s);
    if bare {
        s.to_string()
    } else {
        format!("\"{s}\"")
    }
}

/// Canonical text form; parsing it yields a scene equal to the input.
pub fn serialize_scene(scene: &Scene) -> String {
    let mut out = String::new();
    let c = &scene.camera;
    out.push_str(&format!(
        "camera pos={} look={} up={} fov={} res={}x{}\n",
        fmt_vec(c.pos),
        fmt_vec(c.look),
        fmt_vec(c.up),
        fmt_num(c.fov_deg),
        c.width,
        c.height
    ));
    for (name, m) in scene.material_names.iter().zip(&scene.materials) {
        let body = match m {
            Material::Lambertian { albedo } => format!("lambertian albedo={}", fmt_rgb(*albedo)),
            Material::Mirror { reflectance } => format!("mirror refl={}", fmt_rgb(*reflectance)),
            Material::Dielectric { ior, tint } => format!("dielectric ior={} tint={}", fmt_num(*ior), fmt_rgb(*tint)),
            Material::Phong { diffuse, specular, exponent } => format!(
                "phong diffuse={} specular={} exp={}",
                fmt_rgb(*diffuse),
                fmt_rgb(*specular),
                fmt_num(*exponent)
            ),
        };
        out.push_str(&format!("material {} {body}\n", fmt_str(name)));
    }
    let mut i = 0;
    while i < scene.primitives.len() {
        if let Some(m) = scene.meshes.iter().find(|m| m.first == i && m.count > 0) {
            out.push_str(&format!(
                "mesh obj={} material={}\n",
                fmt_str(&m.obj),
                fmt_str(&scene.material_names[m.material])
            ));
            i += m.count;
            continue;
        }
        let p = &scene.primitives[i];
        let mat = fmt_str(&scene.material_names[p.material]);
        let emit = p.tag.as_ref().map(|t| format!(" emit={}", fmt_str(t))).unwrap_or_default();
        match &p.shape {
            Shape::Sphere { center, radius } => out.push_str(&format!(
                "sphere center={} radius={} material={mat}{emit}\n",
                fmt_vec(*center),
                fmt_num(*radius)
            )),
            Shape::Quad { corner, e1, e2 } => out.push_str(&format!(
                "quad corner={} e1={} e2={} material={mat}{emit}\n",
                fmt_vec(*corner),
                fmt_vec(*e1),
                fmt_vec(*e2)
            )),
            Shape::Triangle { .. } => {}
        }
        i += 1;
    }
    for e in &scene.emitters {
        match e {
            Emitter::Area { radiance, name, .. } => {
                out.push_str(&format!("arealight shape={} radiance={}\n", fmt_str(name), fmt_rgb(*radiance)))
            }
            Emitter::Point { pos, intensity } => {
                out.push_str(&format!("pointlight pos={} intensity={}\n", fmt_vec(*pos), fmt_rgb(*intensity)))
            }
            Emitter::Spot { pos, dir, angle_deg, intensity, texture, .. } => {
                let tex = texture.as_ref().map(|t| format!(" texture={}", fmt_str(&t.source))).unwrap_or_default();
                out.push_str(&format!(
                    "spotlight pos={} dir={} angle={} intensity={}{tex}\n",
                    fmt_vec(*pos),
                    fmt_vec(*dir),
                    fmt_num(*angle_deg),
                    fmt_rgb(*intensity)
                ))
            }
        }
    }
    out
}
