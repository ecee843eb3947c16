import sys

from src.errors import InputError

try:
    from src.cli import main
except InputError as exc:
    print(f"❌ Configuration error: {exc}", file=sys.stderr)
    sys.exit(exc.exit_code)

if __name__ == "__main__":
    sys.exit(main())
