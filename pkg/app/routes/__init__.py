# API routes