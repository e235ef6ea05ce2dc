"""Shared sources and helpers for the test modules."""

from pathlib import Path

from mupuppet import compile, parse_manifest
from mupuppet.cli import value_to_json

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

SSH = """\
class ssh::params {
  case $::osfamily {
  'Debian': { $sshd_package  = 'ssh' }
  'RedHat': { $sshd_package  = 'openssh-server' }
  default:  { fail("SSH class not supported") }
  }
}
class ssh ($ssh_pkg = $::ssh::params::sshd_package) inherits ssh::params {
  package { $ssh_pkg:
    ensure => installed
  }
}
node 'ssh.example.com' {
  include ssh
}
"""


def run(source: str, node: str = "n.example.com", facts=(), **kw):
    """Compile source text; returns the Result."""
    return compile(parse_manifest(source), node, facts, **kw)


def catalog_tuples(catalog):
    """(type, title, {attr: python value}) for readable assertions."""
    return [(r.type, r.title, {k: value_to_json(v) for k, v in r.attrs}) for r in catalog]

THREE_SERVICES = """\
node default {
  $source = '/source'
  include service1
}
class service1 {
  $mode = 123
  include service2
  file { 'config1': path => 'path1', source => $source, mode => $mode }
  $checksum = md5
}
class service2 inherits service3 {
  $recurse = true
}
class service3 {
  $provider = posix
}
"""

CLASS_PARAMETERS = """\
class c ($backupArg = false, $pathArg = '/default', $modeArg = 123) {
  file { 'from_class': backup => $backupArg, source => $pathArg, path => $path, mode => $modeArg }
}
node default {
  $backup = true
  class { c: backupArg => $backup, pathArg => $path }
  $path = '/path'
}
"""
