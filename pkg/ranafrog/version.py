# rana-frog PG/TG FROG pulse retrieval
# Released under the MIT License (see LICENSE for details).

import subprocess
from pathlib import Path

PACKAGE_VERSION = '1.0.0'

def _git(args, repo_dir):
    try:
        return subprocess.check_output(['git'] + args, cwd=repo_dir,
                                       stderr=subprocess.DEVNULL).decode('utf-8').strip()
    except (subprocess.CalledProcessError, OSError):
        return None

def get_git_version():
    """
    Get current Git version information for provenance records.
    Returns a dictionary with commit hash, branch, tag and a version string.
    """
    repo_dir = Path(__file__).parent.parent
    if not (repo_dir / '.git').exists():
        return {
            'commit': 'unknown',
            'branch': 'unknown',
            'tag': None,
            'version_string': PACKAGE_VERSION
        }

    commit = _git(['rev-parse', '--short', 'HEAD'], repo_dir) or 'unknown'
    branch = _git(['rev-parse', '--abbrev-ref', 'HEAD'], repo_dir) or 'unknown'
    tag = _git(['describe', '--tags', '--exact-match'], repo_dir)

    if tag:
        version_string = f"{tag} ({branch}@{commit})"
    else:
        version_string = f"{PACKAGE_VERSION} ({branch}@{commit})"

    return {
        'commit': commit,
        'branch': branch,
        'tag': tag,
        'version_string': version_string
    }

# Cached on first use
_VERSION_INFO = None

def get_version_info():
    'Returns the cached version dictionary'
    global _VERSION_INFO
    if _VERSION_INFO is None:
        _VERSION_INFO = get_git_version()
    return _VERSION_INFO

def get_version_string():
    'Returns a version string for sidecars and reports'
    return get_version_info()['version_string']
