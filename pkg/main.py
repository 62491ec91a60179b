# main.py
import sys
import logging
from cli import main as cli_main

logging.basicConfig(level=logging.INFO, format='%(asctime)s %(levelname)s: %(message)s')

def main():
    """Main entry point for the scattering and masking command line."""
    try:
        sys.exit(cli_main(sys.argv[1:]))
    except KeyboardInterrupt:
        logging.info("Run terminated by user")
        sys.exit(130)

if __name__ == "__main__":
    main()
