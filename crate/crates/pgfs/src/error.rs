use std::fmt;
use std::path::Path;

/// Failure categories, each with its process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Data,
    Runtime,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Usage => 2,
            Category::Data => 3,
            Category::Runtime => 4,
        }
    }
}

#[derive(Debug)]
pub struct Error {
    pub category: Category,
    pub message: String,
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Error {
        Error {
            category: Category::Usage,
            message: msg.into(),
        }
    }

    pub fn data(msg: impl Into<String>) -> Error {
        Error {
            category: Category::Data,
            message: msg.into(),
        }
    }

    pub fn runtime(msg: impl Into<String>) -> Error {
        Error {
            category: Category::Runtime,
            message: msg.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Error {
        Error::data(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        self.category.exit_code()
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
