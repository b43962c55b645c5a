"""Allow running as: python -m zchannel_regions"""

from zchannel_regions import main

main()
