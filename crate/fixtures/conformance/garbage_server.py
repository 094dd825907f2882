"""Fixture server that answers the handshake with non-JSON output."""
import sys

for line in sys.stdin:
    if not line.strip():
        continue
    sys.stdout.write("** definitely not json **\n")
    sys.stdout.flush()
