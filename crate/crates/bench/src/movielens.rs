//! MovieLens-1M ingestion (`::`-delimited `ratings.dat` and `movies.dat`)
//! and the rating tables behind the movie-recommendation utilities.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use drsub_core::linalg::Matrix;
use drsub_core::objectives::LogDiversityUtility;
use drsub_core::Utility;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub user: u32,
    pub movie: u32,
    pub rating: u8,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Movie {
    pub id: u32,
    pub title: String,
    pub genres: Vec<String>,
}

/// Users-by-movies slice of a rating dataset plus per-user pair penalties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieLensExtract {
    pub movie_ids: Vec<u32>,
    pub titles: Vec<String>,
    pub genres: Vec<Vec<String>>,
    pub user_ids: Vec<u32>,
    /// `weights[t][i]`: rating of user `t` for movie `i` divided by 5, or 0
    /// when the user did not rate it.
    pub weights: Vec<Vec<f64>>,
    /// Per-user `theta`, uniform on `[-1, 0]` for same-genre pairs, else 0.
    pub penalties: Vec<Matrix>,
}

/// Parses `UserID::MovieID::Rating::Timestamp` lines. Blank lines are skipped.
pub fn parse_ratings(data: &[u8]) -> Result<Vec<Rating>> {
    let mut out = Vec::new();
    for (idx, raw) in data.split(|b| *b == b'\n').enumerate() {
        let line = String::from_utf8_lossy(raw);
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| BenchError::Malformed {
            file: "ratings".into(),
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split("::").collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        }
        let user = fields[0].trim().parse().map_err(|_| bad(format!("bad user id {:?}", fields[0])))?;
        let movie = fields[1].trim().parse().map_err(|_| bad(format!("bad movie id {:?}", fields[1])))?;
        let rating: u8 = fields[2].trim().parse().map_err(|_| bad(format!("bad rating {:?}", fields[2])))?;
        if !(1..=5).contains(&rating) {
            return Err(bad(format!("rating {rating} outside 1..=5")));
        }
        let timestamp = fields[3]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad timestamp {:?}", fields[3])))?;
        out.push(Rating {
            user,
            movie,
            rating,
            timestamp,
        });
    }
    Ok(out)
}

/// Parses `MovieID::Title::Genres` lines with `|`-separated genres. The
/// title may itself contain `::`. Non-UTF-8 bytes (the 1M release is
/// Latin-1) are replaced.
pub fn parse_movies(data: &[u8]) -> Result<Vec<Movie>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, raw) in data.split(|b| *b == b'\n').enumerate() {
        let line = String::from_utf8_lossy(raw);
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| BenchError::Malformed {
            file: "movies".into(),
            line: idx + 1,
            message,
        };
        let (Some((id, rest)), true) = (line.split_once("::"), line.matches("::").count() >= 2) else {
            return Err(bad("expected MovieID::Title::Genres".into()));
        };
        let (title, genres) = rest.rsplit_once("::").expect("two separators present");
        let id: u32 = id.trim().parse().map_err(|_| bad(format!("bad movie id {id:?}")))?;
        if !seen.insert(id) {
            return Err(bad(format!("duplicate movie id {id}")));
        }
        let genres: Vec<String> = genres
            .split('|')
            .map(str::trim)
            .filter(|g| !g.is_empty())
            .map(String::from)
            .collect();
        out.push(Movie {
            id,
            title: title.to_string(),
            genres,
        });
    }
    Ok(out)
}

/// Selected movie ids, selected user ids and the rating of each `(user, movie)`.
pub type Selection = (Vec<u32>, Vec<u32>, HashMap<(u32, u32), u8>);

/// Keeps the `n_movies` most rated movies, then the `n_users` users with the
/// most ratings among them. Ties go to the smaller id. Movies are ordered by
/// decreasing count, users likewise.
pub fn select(
    ratings: &[Rating],
    movies: &[Movie],
    n_movies: usize,
    n_users: usize,
) -> Result<Selection> {
    if n_movies == 0 || n_users == 0 {
        return Err(BenchError::Config("need at least one movie and one user".into()));
    }
    let mut table: HashMap<(u32, u32), u8> = HashMap::new();
    for r in ratings {
        if table.insert((r.user, r.movie), r.rating).is_some() {
            return Err(BenchError::NotEnoughData(format!(
                "user {} rated movie {} twice",
                r.user, r.movie
            )));
        }
    }
    let mut movie_counts: BTreeMap<u32, usize> = BTreeMap::new();
    for r in ratings {
        *movie_counts.entry(r.movie).or_default() += 1;
    }
    let top_movies = top_by_count(movie_counts, n_movies);
    if top_movies.len() < n_movies {
        return Err(BenchError::NotEnoughData(format!(
            "{n_movies} movies requested, {} have ratings",
            top_movies.len()
        )));
    }
    let known: BTreeSet<u32> = movies.iter().map(|m| m.id).collect();
    if let Some(m) = top_movies.iter().find(|m| !known.contains(m)) {
        return Err(BenchError::NotEnoughData(format!("movie {m} missing from the movies file")));
    }
    let chosen: BTreeSet<u32> = top_movies.iter().copied().collect();
    let mut user_counts: BTreeMap<u32, usize> = BTreeMap::new();
    for r in ratings.iter().filter(|r| chosen.contains(&r.movie)) {
        *user_counts.entry(r.user).or_default() += 1;
    }
    let top_users = top_by_count(user_counts, n_users);
    if top_users.len() < n_users {
        return Err(BenchError::NotEnoughData(format!(
            "{n_users} users requested, {} rated the selected movies",
            top_users.len()
        )));
    }
    Ok((top_movies, top_users, table))
}

fn top_by_count(counts: BTreeMap<u32, usize>, n: usize) -> Vec<u32> {
    let mut v: Vec<(u32, usize)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().take(n).map(|(id, _)| id).collect()
}

/// Reads both files and builds the extract; `seed` drives the penalties.
pub fn ingest_movielens(
    ratings_path: &Path,
    movies_path: &Path,
    n_movies: usize,
    n_users: usize,
    seed: u64,
) -> Result<MovieLensExtract> {
    let ratings = std::fs::read(ratings_path).map_err(|e| BenchError::io(ratings_path, e))?;
    let movies = std::fs::read(movies_path).map_err(|e| BenchError::io(movies_path, e))?;
    from_records(&parse_ratings(&ratings)?, &parse_movies(&movies)?, n_movies, n_users, seed)
}

pub fn from_records(
    ratings: &[Rating],
    movies: &[Movie],
    n_movies: usize,
    n_users: usize,
    seed: u64,
) -> Result<MovieLensExtract> {
    let (movie_ids, user_ids, table) = select(ratings, movies, n_movies, n_users)?;
    let by_id: HashMap<u32, &Movie> = movies.iter().map(|m| (m.id, m)).collect();
    let titles = movie_ids.iter().map(|id| by_id[id].title.clone()).collect();
    let genres: Vec<Vec<String>> = movie_ids.iter().map(|id| by_id[id].genres.clone()).collect();
    let weights = user_ids
        .iter()
        .map(|u| {
            movie_ids
                .iter()
                .map(|m| table.get(&(*u, *m)).map_or(0.0, |r| f64::from(*r) / 5.0))
                .collect()
        })
        .collect();
    let penalties = sample_penalties(&genres, user_ids.len(), seed);
    Ok(MovieLensExtract {
        movie_ids,
        titles,
        genres,
        user_ids,
        weights,
        penalties,
    })
}

/// Draws one penalty matrix per user: `theta_ij = theta_ji ~ U[-1, 0]` when
/// movies `i` and `j` share a genre.
pub fn sample_penalties(genres: &[Vec<String>], users: usize, seed: u64) -> Vec<Matrix> {
    let n = genres.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shares = |i: usize, j: usize| genres[i].iter().any(|g| genres[j].contains(g));
    (0..users)
        .map(|_| {
            let mut m = Matrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    if shares(i, j) {
                        let v = -rng.gen::<f64>();
                        m[(i, j)] = v;
                        m[(j, i)] = v;
                    }
                }
            }
            m
        })
        .collect()
}

/// A MovieLens-shaped table from random ratings: every movie gets one to
/// three of `genres` genres, every (user, movie) pair is rated with
/// probability `density` and each movie has at least one rating.
pub fn synthetic_extract(
    movies: usize,
    users: usize,
    genres: usize,
    density: f64,
    seed: u64,
) -> MovieLensExtract {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let genre_sets: Vec<Vec<String>> = (0..movies)
        .map(|_| {
            let k = rng.gen_range(1..=3.min(genres));
            let mut set = BTreeSet::new();
            while set.len() < k {
                set.insert(rng.gen_range(0..genres));
            }
            set.into_iter().map(|g| format!("genre{g}")).collect()
        })
        .collect();
    let mut weights: Vec<Vec<f64>> = (0..users)
        .map(|_| {
            (0..movies)
                .map(|_| {
                    if rng.gen::<f64>() < density {
                        f64::from(rng.gen_range(1u8..=5)) / 5.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    for i in 0..movies {
        if users > 0 && weights.iter().all(|w| w[i] == 0.0) {
            let u = rng.gen_range(0..users);
            weights[u][i] = f64::from(rng.gen_range(1u8..=5)) / 5.0;
        }
    }
    let penalties = sample_penalties(&genre_sets, users, rng.gen());
    MovieLensExtract {
        movie_ids: (1..=movies as u32).collect(),
        titles: (1..=movies).map(|i| format!("movie {i}")).collect(),
        genres: genre_sets,
        user_ids: (1..=users as u32).collect(),
        weights,
        penalties,
    }
}

impl MovieLensExtract {
    pub fn users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn movies(&self) -> usize {
        self.movie_ids.len()
    }

    /// One log-diversity utility per user, in user order.
    pub fn utilities(&self, scale: f64) -> Result<Vec<Utility>> {
        self.weights
            .iter()
            .zip(&self.penalties)
            .map(|(w, p)| {
                Ok(Utility::LogDiversity(LogDiversityUtility::new(
                    w.clone(),
                    p.clone(),
                    scale,
                )?))
            })
            .collect()
    }

    /// Strong DR-submodularity modulus of the average utility on the unit
    /// box: `min_i mean_t scale R_ti^2 / (1 + R_ti)^2`, the smallest
    /// curvature of the log terms at `x = 1`.
    pub fn average_modulus(&self, scale: f64) -> f64 {
        let t = self.users().max(1) as f64;
        (0..self.movies())
            .map(|i| {
                self.weights
                    .iter()
                    .map(|w| scale * w[i] * w[i] / ((1.0 + w[i]) * (1.0 + w[i])))
                    .sum::<f64>()
                    / t
            })
            .fold(f64::INFINITY, f64::min)
    }
}
