# app package initialization